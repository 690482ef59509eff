//! SVG overlays of worlds, trajectories and potential contours.

use std::fmt::Write as _;

use crate::geometry::World;
use crate::potentials::{Potential, PotentialSpec};
use crate::Point;

const SIZE: f64 = 640.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];
const CONTOUR_GRID: usize = 200;
const BOUNDARY_POINTS: usize = 256;

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn new(world: &World) -> Self {
        let c = &world.workspace.center;
        let r = world.workspace.radius * 1.05;
        Self { x0: c[0] - r, y1: c[1] + r, scale: SIZE / (2.0 * r) }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (self.y1 - y) * self.scale)
    }

    fn path(&self, pts: &[Point], closed: bool) -> String {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (u, v) = self.map(p[0], p[1]);
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, u, v);
        }
        if closed {
            d.push_str(" Z");
        }
        d
    }
}

/// One labelled polyline.
pub struct Track<'a> {
    pub label: String,
    pub points: &'a [Point],
}

/// Renders the workspace, obstacle outlines, `x*`, the given tracks and,
/// with `contours`, ten level curves of `φ` from a 200×200 grid.
/// Output depends only on the inputs.
pub fn render(world: &World, tracks: &[Track<'_>], contours: Option<&PotentialSpec>) -> String {
    let f = Frame::new(world);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let (cx, cy) = f.map(world.workspace.center[0], world.workspace.center[1]);
    let _ = writeln!(
        out,
        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        world.workspace.radius * f.scale
    );
    if let Some(spec) = contours {
        out.push_str(&contour_paths(world, spec, &f));
    }
    for o in &world.obstacles {
        let _ = writeln!(
            out,
            r##"<path d="{}" fill="#bbbbbb" stroke="black" stroke-width="1"/>"##,
            f.path(&o.boundary_points(BOUNDARY_POINTS), true)
        );
    }
    for (i, t) in tracks.iter().enumerate() {
        let finite: Vec<Point> = t.points.iter().filter(|p| p.iter().all(|v| v.is_finite())).cloned().collect();
        if finite.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"><title>{}</title></path>"#,
            f.path(&finite, false),
            escape(&t.label)
        );
        let (u, v) = f.map(finite[0][0], finite[0][1]);
        let _ = writeln!(out, r#"<circle cx="{u:.2}" cy="{v:.2}" r="3" fill="{color}"/>"#);
    }
    let (u, v) = f.map(world.objective.xstar[0], world.objective.xstar[1]);
    let _ = writeln!(
        out,
        r#"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="black" stroke-width="2"/>"#,
        u - 5.0,
        v - 5.0,
        u + 5.0,
        v + 5.0,
        u - 5.0,
        v + 5.0,
        u + 5.0,
        v - 5.0
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn contour_paths(world: &World, spec: &PotentialSpec, f: &Frame) -> String {
    let n = CONTOUR_GRID;
    let c = &world.workspace.center;
    let r = world.workspace.radius;
    let h = 2.0 * r / (n - 1) as f64;
    let coord = |i: usize, j: usize| (c[0] - r + i as f64 * h, c[1] - r + j as f64 * h);
    let mut grid = vec![f64::NAN; n * n];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = coord(i, j);
            let p = Point::from_vec(vec![x, y]);
            if world.in_free_interior(&p) {
                grid[j * n + i] = spec.value(world, &p).unwrap_or(f64::NAN);
            }
        }
    }
    let finite: Vec<f64> = grid.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return String::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = String::new();
    for l in 1..=10 {
        let level = lo + (hi - lo) * l as f64 / 11.0;
        let mut d = String::new();
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let v = [grid[j * n + i], grid[j * n + i + 1], grid[(j + 1) * n + i + 1], grid[(j + 1) * n + i]];
                if v.iter().any(|a| !a.is_finite()) {
                    continue;
                }
                let corners = [coord(i, j), coord(i + 1, j), coord(i + 1, j + 1), coord(i, j + 1)];
                let mut cuts = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (v[e], v[(e + 1) % 4]);
                    if (a < level) != (b < level) {
                        let s = (level - a) / (b - a);
                        let (p, q) = (corners[e], corners[(e + 1) % 4]);
                        cuts.push((p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1)));
                    }
                }
                for pair in cuts.chunks(2) {
                    if let [a, b] = pair {
                        let (u0, v0) = f.map(a.0, a.1);
                        let (u1, v1) = f.map(b.0, b.1);
                        let _ = write!(d, "M{u0:.2},{v0:.2} L{u1:.2},{v1:.2} ");
                    }
                }
            }
        }
        if !d.is_empty() {
            let _ = writeln!(
                out,
                r##"<path d="{}" fill="none" stroke="#999999" stroke-width="0.6"/>"##,
                d.trim_end()
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Obstacle, QuadraticObjective, SphereObstacle, WorkspaceSphere};
    use nalgebra::dvector;

    fn world() -> World {
        World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 10.0).unwrap(),
            vec![Obstacle::Sphere(SphereObstacle::new(dvector![3.0, 0.0], 1.0).unwrap())],
            QuadraticObjective::isotropic(dvector![6.0, 0.0], 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn renders_all_layers() {
        let w = world();
        let path = vec![dvector![-5.0, 0.0], dvector![0.0, 2.0], dvector![6.0, 0.0]];
        let spec = PotentialSpec::rimon_koditschek(4.0).unwrap();
        let svg = render(&w, &[Track { label: "run <0>".into(), points: &path }], Some(&spec));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("run &lt;0&gt;"));
        assert!(svg.matches("stroke=\"#999999\"").count() >= 5);
        assert_eq!(svg, render(&w, &[Track { label: "run <0>".into(), points: &path }], Some(&spec)));
    }
}
