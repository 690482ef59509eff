//! Convex obstacles in closed functional form.
//!
//! Every obstacle is described by a defining function `β_i` that is negative
//! strictly inside, zero on the boundary and positive outside. Queries that
//! only make sense outside the obstacle (projection, egg Hessians) reject
//! points that are inside or on it.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::numeric::{golden_section_min, sym_eigen};
use crate::Point;

/// Closest boundary point of an obstacle with the distance and unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Point,
    pub distance: f64,
    /// Unit vector from the boundary point towards the query point.
    pub normal: DVector<f64>,
}

const PROJECTION_MAX_ITERS: usize = 100;
const PROJECTION_TOL: f64 = 1e-10;
/// Boundary samples used to bound the egg's tangential curvature from below.
pub const EGG_CURVATURE_SAMPLES: usize = 10_000;

/// Tolerance for "on the boundary" relative to the obstacle scale.
pub fn boundary_tolerance(scale: f64) -> f64 {
    1e-9 * (scale * scale).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereObstacle {
    pub center: Point,
    pub radius: f64,
}

impl SphereObstacle {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(NavError::InvalidParameter(format!("sphere radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }
}

/// `β(x) = (x−c)ᵀA(x−c) − μ·r²` where `μ` is the smallest eigenvalue of `A`,
/// so `r` is the length of the largest semi-axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseObstacle {
    pub center: Point,
    pub matrix: DMatrix<f64>,
    pub scale: f64,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl EllipseObstacle {
    pub fn new(center: Point, matrix: DMatrix<f64>, scale: f64) -> Result<Self> {
        let n = center.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(NavError::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        check_symmetric_pd(&matrix, "ellipse matrix")?;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(NavError::InvalidParameter(format!("ellipse scale {scale} must be positive")));
        }
        let (eigenvalues, eigenvectors) = sym_eigen(&matrix);
        Ok(Self { center, matrix, scale, eigenvalues, eigenvectors })
    }

    /// Smallest eigenvalue of `A`.
    pub fn mu(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `μ·r²`, the level of the boundary.
    pub fn level(&self) -> f64 {
        self.mu() * self.scale * self.scale
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    fn is_isotropic(&self) -> bool {
        let n = self.eigenvalues.len();
        (self.eigenvalues[n - 1] - self.eigenvalues[0]).abs() <= 1e-14 * self.eigenvalues[n - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EggAxis {
    Horizontal,
    Vertical,
}

/// Planar egg `β(x) = ‖x−c‖⁴ − 2r·(x⁽ᵃ⁾−c⁽ᵃ⁾)³` with `a` the axis component.
///
/// `c` is the pointed tip of the egg; the egg extends `2r` along the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EggObstacle {
    pub center: Point,
    pub tip_distance: f64,
    pub axis: EggAxis,
    tangential_min: f64,
    moment_fit: (DMatrix<f64>, Point, f64),
}

impl EggObstacle {
    pub fn new(center: Point, tip_distance: f64, axis: EggAxis) -> Result<Self> {
        if center.len() != 2 {
            return Err(NavError::Unsupported("egg obstacles are planar".into()));
        }
        if !(tip_distance > 0.0) || !tip_distance.is_finite() {
            return Err(NavError::InvalidParameter(format!("egg tip distance {tip_distance} must be positive")));
        }
        let mut egg = Self {
            center,
            tip_distance,
            axis,
            tangential_min: 0.0,
            moment_fit: (DMatrix::zeros(2, 2), DVector::zeros(2), 0.0),
        };
        egg.tangential_min = egg.sampled_tangential_min(EGG_CURVATURE_SAMPLES);
        let boundary: Vec<Point> = (0..2048)
            .map(|j| egg.boundary_at(-FRAC_PI_2 + PI * (j as f64 + 0.5) / 2048.0))
            .collect();
        egg.moment_fit = moment_ellipse(&boundary);
        Ok(egg)
    }

    /// Local coordinates `(a, b)` with `a` along the egg axis.
    fn local(&self, x: &Point) -> (f64, f64) {
        let u0 = x[0] - self.center[0];
        let u1 = x[1] - self.center[1];
        match self.axis {
            EggAxis::Horizontal => (u0, u1),
            EggAxis::Vertical => (u1, u0),
        }
    }

    fn global(&self, a: f64, b: f64) -> Point {
        match self.axis {
            EggAxis::Horizontal => DVector::from_vec(vec![self.center[0] + a, self.center[1] + b]),
            EggAxis::Vertical => DVector::from_vec(vec![self.center[0] + b, self.center[1] + a]),
        }
    }

    fn global_vec(&self, a: f64, b: f64) -> DVector<f64> {
        match self.axis {
            EggAxis::Horizontal => DVector::from_vec(vec![a, b]),
            EggAxis::Vertical => DVector::from_vec(vec![b, a]),
        }
    }

    /// Boundary point at polar angle `θ ∈ [−π/2, π/2]` in local coordinates.
    pub fn boundary_at(&self, theta: f64) -> Point {
        let (a, b) = self.local_boundary(theta);
        self.global(a, b)
    }

    fn local_boundary(&self, theta: f64) -> (f64, f64) {
        let c = theta.cos();
        let rho = 2.0 * self.tip_distance * c * c * c;
        (rho * c, rho * theta.sin())
    }

    fn local_boundary_d1(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let r2 = 2.0 * self.tip_distance;
        (r2 * (-4.0 * c * c * c * s), r2 * (c.powi(4) - 3.0 * c * c * s * s))
    }

    fn local_boundary_d2(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let r2 = 2.0 * self.tip_distance;
        (
            r2 * (12.0 * c * c * s * s - 4.0 * c.powi(4)),
            r2 * (6.0 * c * s.powi(3) - 10.0 * c.powi(3) * s),
        )
    }

    fn local_hessian(&self, a: f64, b: f64) -> [[f64; 2]; 2] {
        let rho2 = a * a + b * b;
        let r = self.tip_distance;
        [
            [4.0 * rho2 + 8.0 * a * a - 12.0 * r * a, 8.0 * a * b],
            [8.0 * a * b, 4.0 * rho2 + 8.0 * b * b],
        ]
    }

    /// Smallest tangential second derivative `tᵀ∇²β t` (unit tangent `t`)
    /// over sampled boundary points, excluding the tip.
    fn sampled_tangential_min(&self, samples: usize) -> f64 {
        let mut min = f64::INFINITY;
        for j in 0..samples {
            let theta = -FRAC_PI_2 + PI * (j as f64 + 0.5) / samples as f64;
            let (a, b) = self.local_boundary(theta);
            let rho2 = a * a + b * b;
            let g = (4.0 * rho2 * a - 6.0 * self.tip_distance * a * a, 4.0 * rho2 * b);
            let norm = (g.0 * g.0 + g.1 * g.1).sqrt();
            if norm == 0.0 {
                continue;
            }
            let t = (-g.1 / norm, g.0 / norm);
            let h = self.local_hessian(a, b);
            let q = t.0 * t.0 * h[0][0] + 2.0 * t.0 * t.1 * h[0][1] + t.1 * t.1 * h[1][1];
            min = min.min(q);
        }
        min
    }

    /// Cached infimum of the tangential Hessian form over the boundary samples.
    pub fn tangential_curvature_min(&self) -> f64 {
        self.tangential_min
    }
}

/// Obstacle kinds supported by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Obstacle {
    Sphere(SphereObstacle),
    Ellipse(EllipseObstacle),
    Egg(EggObstacle),
}

impl Obstacle {
    pub fn dim(&self) -> usize {
        match self {
            Obstacle::Sphere(s) => s.center.len(),
            Obstacle::Ellipse(e) => e.center.len(),
            Obstacle::Egg(_) => 2,
        }
    }

    pub fn center(&self) -> &Point {
        match self {
            Obstacle::Sphere(s) => &s.center,
            Obstacle::Ellipse(e) => &e.center,
            Obstacle::Egg(g) => &g.center,
        }
    }

    /// A characteristic length used for tolerances and finite-difference steps.
    pub fn scale(&self) -> f64 {
        match self {
            Obstacle::Sphere(s) => s.radius,
            Obstacle::Ellipse(e) => e.scale,
            Obstacle::Egg(g) => g.tip_distance,
        }
    }

    /// A point strictly inside the obstacle.
    pub fn interior_point(&self) -> Point {
        match self {
            Obstacle::Sphere(s) => s.center.clone(),
            Obstacle::Ellipse(e) => e.center.clone(),
            Obstacle::Egg(g) => g.global(g.tip_distance, 0.0),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            Obstacle::Sphere(s) => (x - &s.center).norm_squared() - s.radius * s.radius,
            Obstacle::Ellipse(e) => {
                let u = x - &e.center;
                u.dot(&(&e.matrix * &u)) - e.level()
            }
            Obstacle::Egg(g) => {
                let (a, b) = g.local(x);
                let rho2 = a * a + b * b;
                rho2 * rho2 - 2.0 * g.tip_distance * a * a * a
            }
        }
    }

    pub fn gradient(&self, x: &Point) -> DVector<f64> {
        match self {
            Obstacle::Sphere(s) => (x - &s.center) * 2.0,
            Obstacle::Ellipse(e) => (&e.matrix * (x - &e.center)) * 2.0,
            Obstacle::Egg(g) => {
                let (a, b) = g.local(x);
                let rho2 = a * a + b * b;
                g.global_vec(4.0 * rho2 * a - 6.0 * g.tip_distance * a * a, 4.0 * rho2 * b)
            }
        }
    }

    pub fn hessian(&self, x: &Point) -> DMatrix<f64> {
        match self {
            Obstacle::Sphere(s) => DMatrix::identity(s.center.len(), s.center.len()) * 2.0,
            Obstacle::Ellipse(e) => &e.matrix * 2.0,
            Obstacle::Egg(g) => {
                let (a, b) = g.local(x);
                let h = g.local_hessian(a, b);
                match g.axis {
                    EggAxis::Horizontal => DMatrix::from_row_slice(2, 2, &[h[0][0], h[0][1], h[1][0], h[1][1]]),
                    EggAxis::Vertical => DMatrix::from_row_slice(2, 2, &[h[1][1], h[1][0], h[0][1], h[0][0]]),
                }
            }
        }
    }

    /// Smallest eigenvalue of `∇²β` at `x`.
    ///
    /// Sphere and ellipse values are constant. For the egg the point must lie
    /// outside the open obstacle, and an indefinite Hessian there is reported
    /// as an invariant violation.
    pub fn hessian_min_eigenvalue(&self, x: &Point) -> Result<f64> {
        match self {
            Obstacle::Sphere(_) => Ok(2.0),
            Obstacle::Ellipse(e) => Ok(2.0 * e.mu()),
            Obstacle::Egg(g) => {
                if self.value(x) < -boundary_tolerance(g.tip_distance) {
                    return Err(NavError::CollisionQuery { index: 0 });
                }
                let h = self.hessian(x);
                let ev = crate::numeric::sym_eigenvalues(&h);
                let tol = 1e-12 * g.tip_distance * g.tip_distance;
                if ev[0] < -tol {
                    return Err(NavError::InvariantViolation(format!(
                        "egg Hessian is indefinite at an exterior point (min eigenvalue {:.3e})",
                        ev[0]
                    )));
                }
                Ok(ev[0])
            }
        }
    }

    /// Per-obstacle curvature constant `μ_min^i` used by the validity condition.
    ///
    /// For the egg this is the infimum of the tangential Hessian form over
    /// boundary samples, since its full Hessian is indefinite on the boundary.
    pub fn mu_min(&self) -> f64 {
        match self {
            Obstacle::Sphere(_) => 2.0,
            Obstacle::Ellipse(e) => 2.0 * e.mu(),
            Obstacle::Egg(g) => g.tangential_curvature_min(),
        }
    }

    /// Curvature constant at a boundary point: `μ_min^i` for quadrics, the
    /// tangential Hessian form `tᵀ∇²β t` for eggs.
    pub fn curvature_constant_at(&self, p: &Point) -> f64 {
        match self {
            Obstacle::Egg(_) => {
                let g = self.gradient(p);
                let norm = g.norm();
                if norm == 0.0 {
                    return 0.0;
                }
                let t = DVector::from_vec(vec![-g[1] / norm, g[0] / norm]);
                t.dot(&(self.hessian(p) * &t))
            }
            _ => self.mu_min(),
        }
    }

    /// Closest boundary point to an exterior point.
    pub fn project(&self, x: &Point) -> Result<Projection> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NavError::InvalidParameter("non-finite query point".into()));
        }
        let tol = boundary_tolerance(self.scale());
        if self.value(x) <= tol {
            return Err(NavError::CollisionQuery { index: 0 });
        }
        let point = match self {
            Obstacle::Sphere(s) => {
                let u = x - &s.center;
                &s.center + u * (s.radius / (x - &s.center).norm())
            }
            Obstacle::Ellipse(e) => project_ellipse(e, x)?,
            Obstacle::Egg(g) => project_egg(g, x),
        };
        let residual = self.value(&point).abs();
        if residual > PROJECTION_TOL * self.scale().powi(4).max(1.0) {
            return Err(NavError::ProjectionDiverged { residual });
        }
        let diff = x - &point;
        let distance = diff.norm();
        Ok(Projection { normal: diff / distance, point, distance })
    }

    /// Radius of curvature of the boundary at a boundary point (planar only,
    /// except spheres which answer in any dimension).
    ///
    /// Returns `0` at the egg tip, where the gradient vanishes and the
    /// curvature is unbounded.
    pub fn boundary_curvature_radius(&self, p: &Point) -> Result<f64> {
        if let Obstacle::Sphere(s) = self {
            return Ok(s.radius);
        }
        if p.len() != 2 {
            return Err(NavError::Unsupported("curvature radius is only defined for planar boundaries".into()));
        }
        if self.value(p).abs() > boundary_tolerance(self.scale()) * 10.0 {
            return Err(NavError::InvalidParameter("curvature query off the boundary".into()));
        }
        let g = self.gradient(p);
        let gnorm = g.norm();
        if gnorm <= 1e-12 * self.scale().powi(3) {
            return Ok(0.0);
        }
        let h = self.hessian(p);
        curvature_radius_from_derivatives(&g, &h)
    }

    /// `count` boundary points spread over the whole boundary.
    pub fn boundary_points(&self, count: usize) -> Vec<Point> {
        match self {
            Obstacle::Egg(g) => (0..count)
                .map(|j| g.boundary_at(-FRAC_PI_2 + PI * (j as f64 + 0.5) / count as f64))
                .collect(),
            _ => unit_directions(self.dim(), count)
                .into_iter()
                .map(|u| self.ray_boundary(&u))
                .collect(),
        }
    }

    /// Boundary point on the ray from the centre in direction `u` (unit).
    fn ray_boundary(&self, u: &DVector<f64>) -> Point {
        match self {
            Obstacle::Sphere(s) => &s.center + u * s.radius,
            Obstacle::Ellipse(e) => {
                let q = u.dot(&(&e.matrix * u));
                &e.center + u * (e.level() / q).sqrt()
            }
            Obstacle::Egg(g) => {
                let (a, b) = match g.axis {
                    EggAxis::Horizontal => (u[0], u[1]),
                    EggAxis::Vertical => (u[1], u[0]),
                };
                g.boundary_at(b.atan2(a).clamp(-FRAC_PI_2, FRAC_PI_2))
            }
        }
    }

    /// Ellipse `(A, x_c, r²)` that best describes the obstacle: exact for
    /// spheres and ellipses, area-moment fit for eggs.
    pub fn fitted_ellipse(&self) -> (DMatrix<f64>, Point, f64) {
        match self {
            Obstacle::Sphere(s) => {
                let n = s.center.len();
                (DMatrix::identity(n, n), s.center.clone(), s.radius * s.radius)
            }
            Obstacle::Ellipse(e) => (e.matrix.clone(), e.center.clone(), e.level()),
            Obstacle::Egg(g) => g.moment_fit.clone(),
        }
    }
}

fn curvature_radius_from_derivatives(g: &DVector<f64>, h: &DMatrix<f64>) -> Result<f64> {
    let (bx, by) = (g[0], g[1]);
    let denom = by * by * h[(0, 0)] - 2.0 * bx * by * h[(0, 1)] + bx * bx * h[(1, 1)];
    if !(denom > 0.0) {
        return Err(NavError::InvariantViolation(format!(
            "non-positive boundary curvature (denominator {denom:.3e})"
        )));
    }
    Ok(g.norm().powi(3) / denom)
}

fn project_ellipse(e: &EllipseObstacle, x: &Point) -> Result<Point> {
    let u = x - &e.center;
    if e.is_isotropic() {
        let radius = (e.level() / e.eigenvalues[0]).sqrt();
        return Ok(&e.center + &u * (radius / u.norm()));
    }
    // KKT: x − P = 2t·A(P − c) ⇒ P − c = (I + 2tA)⁻¹(x − c); solve β(P(t)) = 0 for t ≥ 0.
    let y = e.eigenvectors.transpose() * &u;
    let lam = &e.eigenvalues;
    let level = e.level();
    let h = |t: f64| -> (f64, f64) {
        let mut val = -level;
        let mut der = 0.0;
        for j in 0..y.len() {
            let den = 1.0 + 2.0 * t * lam[j];
            let yj2 = y[j] * y[j];
            val += lam[j] * yj2 / (den * den);
            der -= 4.0 * lam[j] * lam[j] * yj2 / (den * den * den);
        }
        (val, der)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while h(hi).0 > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(NavError::ProjectionDiverged { residual: h(hi).0 });
        }
    }
    let mut t = 0.0;
    let mut converged = false;
    for _ in 0..PROJECTION_MAX_ITERS {
        let (val, der) = h(t);
        if val > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if val.abs() <= 1e-15 * level {
            converged = true;
            break;
        }
        let mut next = t - val / der;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-17 * t.abs().max(1e-300) {
            t = next;
            converged = true;
            break;
        }
        t = next;
    }
    let p_local = DVector::from_iterator(y.len(), (0..y.len()).map(|j| y[j] / (1.0 + 2.0 * t * lam[j])));
    let p = &e.center + &e.eigenvectors * p_local;
    if !converged {
        let residual = (p.clone() - &e.center).dot(&(&e.matrix * (&p - &e.center))) - level;
        if residual.abs() > PROJECTION_TOL {
            return Err(NavError::ProjectionDiverged { residual });
        }
    }
    Ok(p)
}

fn project_egg(g: &EggObstacle, x: &Point) -> Point {
    let (a, b) = g.local(x);
    let dist2 = |theta: f64| {
        let (pa, pb) = g.local_boundary(theta);
        (a - pa) * (a - pa) + (b - pb) * (b - pb)
    };
    const COARSE: usize = 720;
    let step = PI / COARSE as f64;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for j in 0..=COARSE {
        let v = dist2(-FRAC_PI_2 + step * j as f64);
        if v < best_val {
            best_val = v;
            best = j;
        }
    }
    let lo = (-FRAC_PI_2 + step * (best as f64 - 1.0)).max(-FRAC_PI_2);
    let hi = (-FRAC_PI_2 + step * (best as f64 + 1.0)).min(FRAC_PI_2);
    let (mut theta, mut val) = golden_section_min(dist2, lo, hi, 1e-13);
    // Newton polish on d/dθ ‖u − γ(θ)‖² = 0.
    for _ in 0..8 {
        let (pa, pb) = g.local_boundary(theta);
        let (d1a, d1b) = g.local_boundary_d1(theta);
        let (d2a, d2b) = g.local_boundary_d2(theta);
        let (ra, rb) = (a - pa, b - pb);
        let grad = -2.0 * (ra * d1a + rb * d1b);
        let curv = 2.0 * (d1a * d1a + d1b * d1b) - 2.0 * (ra * d2a + rb * d2b);
        if !(curv > 0.0) {
            break;
        }
        let next = (theta - grad / curv).clamp(-FRAC_PI_2, FRAC_PI_2);
        let next_val = dist2(next);
        if next_val <= val {
            let done = (next - theta).abs() < 1e-16;
            theta = next;
            val = next_val;
            if done {
                break;
            }
        } else {
            break;
        }
    }
    g.boundary_at(theta)
}

/// Ellipse with the same area moments (centroid, covariance) as the polygon.
fn moment_ellipse(boundary: &[Point]) -> (DMatrix<f64>, Point, f64) {
    let n = boundary.len();
    let (mut area, mut cx, mut cy) = (0.0, 0.0, 0.0);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = &boundary[i];
        let q = &boundary[(i + 1) % n];
        let cross = p[0] * q[1] - q[0] * p[1];
        area += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
        sxx += (p[0] * p[0] + p[0] * q[0] + q[0] * q[0]) * cross;
        syy += (p[1] * p[1] + p[1] * q[1] + q[1] * q[1]) * cross;
        sxy += (p[0] * q[1] + 2.0 * p[0] * p[1] + 2.0 * q[0] * q[1] + q[0] * p[1]) * cross;
    }
    area *= 0.5;
    cx /= 6.0 * area;
    cy /= 6.0 * area;
    let ixx = sxx / (12.0 * area) - cx * cx;
    let iyy = syy / (12.0 * area) - cy * cy;
    let ixy = sxy / (24.0 * area) - cx * cy;
    // A filled ellipse xᵀMx ≤ 1 has covariance M⁻¹/4.
    let cov = DMatrix::from_row_slice(2, 2, &[ixx, ixy, ixy, iyy]);
    let m = cov.try_inverse().unwrap_or_else(|| DMatrix::identity(2, 2)) * 0.25;
    (m, DVector::from_vec(vec![cx, cy]), 1.0)
}

/// Deterministic spread of unit directions: an angle grid in the plane,
/// coordinate axes followed by a fixed pseudo-random cloud otherwise.
pub fn unit_directions(dim: usize, count: usize) -> Vec<DVector<f64>> {
    if dim == 2 {
        return (0..count)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / count as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect();
    }
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut out = Vec::with_capacity(count);
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            if out.len() < count {
                let mut v = DVector::zeros(dim);
                v[axis] = sign;
                out.push(v);
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xD1_5EC7);
    while out.len() < count {
        let v = DVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(&mut rng)));
        let norm: f64 = v.norm();
        if norm > 1e-12 {
            out.push(v / norm);
        }
    }
    out
}

/// Checks that `m` is symmetric within `1e-12` and positive definite.
pub fn check_symmetric_pd(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(NavError::InvalidParameter(format!("{what} is not square")));
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-12 {
        return Err(NavError::InvalidParameter(format!("{what} is not symmetric (|A−Aᵀ| = {asym:.3e})")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(NavError::InvalidParameter(format!("{what} has non-finite entries")));
    }
    let ev = crate::numeric::sym_eigenvalues(m);
    if !(ev[0] > 0.0) {
        return Err(NavError::InvalidParameter(format!("{what} is not positive definite (min eigenvalue {:.3e})", ev[0])));
    }
    Ok(())
}
