//! Numerical location and classification of critical points.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::World;
use crate::numeric::{fd_jacobian, sym_eigenvalues};
use crate::potentials::{Potential, PotentialKind, PotentialSpec};
use crate::Point;

const MAX_NEWTON_ITERS: usize = 200;
const DEDUPE_RADIUS: f64 = 1e-6;
const DEGENERATE_EIGENVALUE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Minimum,
    Saddle,
    Maximum,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub point: Vec<f64>,
    pub kind: CriticalKind,
    /// Eigenvalues of the Jacobian of the critical residual, ascending. At a
    /// critical point this is a positive multiple of the Hessian of `φ`.
    pub eigenvalues: Vec<f64>,
    pub beta: f64,
    pub residual: f64,
}

impl CriticalPoint {
    pub fn position(&self) -> Point {
        DVector::from_vec(self.point.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSeed {
    pub seed: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub points: Vec<CriticalPoint>,
    pub skipped: Vec<SkippedSeed>,
}

impl CriticalReport {
    pub fn count(&self, kind: CriticalKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }

    pub fn of_kind(&self, kind: CriticalKind) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(move |p| p.kind == kind)
    }

    /// One minimum, one saddle per obstacle and nothing else.
    pub fn is_navigation_pattern(&self, obstacles: usize) -> bool {
        self.count(CriticalKind::Minimum) == 1
            && self.count(CriticalKind::Saddle) == obstacles
            && self.points.len() == obstacles + 1
    }
}

fn residual_or_nan<P: Potential + ?Sized>(pot: &P, world: &World, x: &Point) -> DVector<f64> {
    pot.critical_residual(world, x)
        .unwrap_or_else(|_| DVector::from_element(x.len(), f64::NAN))
}

fn newton<P: Potential + ?Sized>(pot: &P, world: &World, seed: &Point) -> std::result::Result<Point, String> {
    let scale = world.scale();
    let h = 1e-7 * scale;
    let tol = 1e-10 * (1.0 + world.objective.lambda_max() * scale);
    let mut x = seed.clone();
    let mut f = pot.critical_residual(world, &x).map_err(|e| e.to_string())?;
    for _ in 0..MAX_NEWTON_ITERS {
        let fnorm = f.norm();
        if fnorm <= tol {
            return Ok(x);
        }
        let jac = fd_jacobian(|p| residual_or_nan(pot, world, p), &x, h);
        if jac.iter().any(|v| !v.is_finite()) {
            return Err("jacobian left the free space".into());
        }
        let step = jac.lu().solve(&(-&f)).ok_or("singular jacobian")?;
        let max_len = 0.25 * scale;
        let step = if step.norm() > max_len { &step * (max_len / step.norm()) } else { step };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let xn = &x + &step * t;
            if world.in_free_interior(&xn) {
                if let Ok(fn_) = pot.critical_residual(world, &xn) {
                    if fn_.norm() < (1.0 - 1e-4 * t) * fnorm {
                        x = xn;
                        f = fn_;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // finite-difference noise floor
            if fnorm <= 1e-6 * (1.0 + world.objective.lambda_max() * scale) {
                return Ok(x);
            }
            return Err(format!("line search stalled at residual {fnorm:.3e}"));
        }
    }
    Err("newton iteration limit".into())
}

/// Classifies a root from the Jacobian spectrum of the critical residual.
pub fn classify<P: Potential + ?Sized>(pot: &P, world: &World, x: &Point) -> (CriticalKind, Vec<f64>) {
    let h = 1e-6 * world.scale();
    let jac = fd_jacobian(|p| residual_or_nan(pot, world, p), x, h);
    if jac.iter().any(|v| !v.is_finite()) {
        return (CriticalKind::Degenerate, vec![]);
    }
    let ev = sym_eigenvalues(&jac);
    let kind = if ev.iter().any(|v| v.abs() < DEGENERATE_EIGENVALUE) {
        CriticalKind::Degenerate
    } else if ev.iter().all(|&v| v > 0.0) {
        CriticalKind::Minimum
    } else if ev.iter().all(|&v| v < 0.0) {
        CriticalKind::Maximum
    } else {
        CriticalKind::Saddle
    };
    (kind, ev)
}

/// Damped Newton from every seed, deduplicated and classified.
pub fn find_critical_points<P: Potential + ?Sized>(world: &World, pot: &P, seeds: &[Point]) -> CriticalReport {
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut skipped = Vec::new();
    for (i, seed) in seeds.iter().enumerate() {
        if !world.in_free_interior(seed) {
            skipped.push(SkippedSeed { seed: i, reason: "seed outside the free space".into() });
            continue;
        }
        match newton(pot, world, seed) {
            Ok(x) => {
                if points.iter().any(|p| (p.position() - &x).norm() < DEDUPE_RADIUS) {
                    continue;
                }
                let (kind, eigenvalues) = classify(pot, world, &x);
                let residual = residual_or_nan(pot, world, &x).norm();
                points.push(CriticalPoint {
                    point: x.iter().copied().collect(),
                    kind,
                    eigenvalues,
                    beta: world.beta(&x),
                    residual,
                });
            }
            Err(reason) => skipped.push(SkippedSeed { seed: i, reason }),
        }
    }
    CriticalReport { points, skipped }
}

/// Far-side ray seeds behind every obstacle plus a `grid × grid` lattice
/// over the workspace bounding box, restricted to the free interior.
pub fn default_seeds(world: &World, grid: usize) -> Vec<Point> {
    let xstar = &world.objective.xstar;
    let mut seeds = Vec::new();
    for o in &world.obstacles {
        let inside = o.interior_point();
        let dir = &inside - xstar;
        if dir.norm() == 0.0 {
            continue;
        }
        let u = &dir / dir.norm();
        let mut hi = o.scale();
        while o.value(&(&inside + &u * hi)) <= 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if o.value(&(&inside + &u * mid)) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let far = &inside + &u * hi;
        let seed = xstar + (far - xstar) * 1.05;
        if world.in_free_interior(&seed) {
            seeds.push(seed);
        }
    }
    let c = &world.workspace.center;
    let r = world.workspace.radius;
    for a in 0..grid {
        for b in 0..grid {
            let mut p = xstar.clone();
            p[0] = c[0] - r + 2.0 * r * (a as f64 + 0.5) / grid as f64;
            if p.len() > 1 {
                p[1] = c[1] - r + 2.0 * r * (b as f64 + 0.5) / grid as f64;
            } else if b > 0 {
                continue;
            }
            if world.in_free_interior(&p) {
                seeds.push(p);
            }
        }
    }
    seeds
}

/// Numerically located minimum of the potential (closest to `x*` if several).
pub fn locate_minimum<P: Potential + ?Sized>(world: &World, pot: &P) -> Result<Point> {
    let xstar = world.objective.xstar.clone();
    if let Ok(x) = newton(pot, world, &xstar) {
        if classify(pot, world, &x).0 == CriticalKind::Minimum {
            return Ok(x);
        }
    }
    let report = find_critical_points(world, pot, &default_seeds(world, 10));
    report
        .of_kind(CriticalKind::Minimum)
        .map(|p| p.position())
        .min_by(|a, b| (a - &xstar).norm().total_cmp(&(b - &xstar).norm()))
        .ok_or_else(|| NavError::InvariantViolation("no minimum of the potential was located".into()))
}

/// Doubles `k` from `k0` until the critical points form the navigation
/// pattern (one minimum, one saddle per obstacle), up to `k_max`.
pub fn find_order(world: &World, kind: PotentialKind, k0: f64, k_max: f64) -> Option<(f64, CriticalReport)> {
    let seeds = default_seeds(world, 20);
    let mut k = k0;
    while k <= k_max {
        let spec = PotentialSpec::new(kind, k).ok()?;
        let report = find_critical_points(world, &spec, &seeds);
        if report.is_navigation_pattern(world.obstacles.len()) {
            return Some((k, report));
        }
        k *= 2.0;
    }
    None
}
