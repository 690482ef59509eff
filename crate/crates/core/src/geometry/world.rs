//! Workspace shell, quadratic objective and the assembled world.

use nalgebra::{DMatrix, DVector};

use crate::error::{NavError, Result};
use crate::geometry::obstacle::{boundary_tolerance, check_symmetric_pd, Obstacle, Projection};
use crate::numeric::sym_eigenvalues;
use crate::Point;

/// Spherical shell bounding the workspace; `β₀(x) = r₀² − ‖x − c₀‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceSphere {
    pub center: Point,
    pub radius: f64,
}

impl WorkspaceSphere {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(NavError::InvalidParameter(format!("workspace radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn value(&self, x: &Point) -> f64 {
        self.radius * self.radius - (x - &self.center).norm_squared()
    }

    pub fn gradient(&self, x: &Point) -> DVector<f64> {
        (x - &self.center) * -2.0
    }

    /// Closest point on the shell from an interior point; the normal points
    /// from the shell back into the workspace.
    pub fn project(&self, x: &Point) -> Result<Projection> {
        let u = x - &self.center;
        let rho = u.norm();
        if rho >= self.radius {
            return Err(NavError::CollisionQuery { index: 0 });
        }
        let dir = if rho > 0.0 {
            u / rho
        } else {
            let mut e = DVector::zeros(x.len());
            e[0] = 1.0;
            e
        };
        let point = &self.center + &dir * self.radius;
        Ok(Projection { point, distance: self.radius - rho, normal: -dir })
    }
}

/// `f₀(x) = (x − x*)ᵀQ(x − x*) + f_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    pub xstar: Point,
    pub q: DMatrix<f64>,
    pub fmin: f64,
    lambda_min: f64,
    lambda_max: f64,
}

impl QuadraticObjective {
    pub fn new(xstar: Point, q: DMatrix<f64>, fmin: f64) -> Result<Self> {
        if q.nrows() != xstar.len() {
            return Err(NavError::DimensionMismatch { expected: xstar.len(), got: q.nrows() });
        }
        check_symmetric_pd(&q, "objective matrix Q")?;
        if !(fmin >= 0.0) || !fmin.is_finite() {
            return Err(NavError::InvalidParameter(format!("f_min {fmin} must be non-negative")));
        }
        let ev = sym_eigenvalues(&q);
        Ok(Self { xstar, q, fmin, lambda_min: ev[0], lambda_max: ev[ev.len() - 1] })
    }

    /// Isotropic objective `‖x − x*‖² + f_min`.
    pub fn isotropic(xstar: Point, fmin: f64) -> Result<Self> {
        let n = xstar.len();
        Self::new(xstar, DMatrix::identity(n, n), fmin)
    }

    pub fn value(&self, x: &Point) -> f64 {
        let u = x - &self.xstar;
        u.dot(&(&self.q * &u)) + self.fmin
    }

    pub fn gradient(&self, x: &Point) -> DVector<f64> {
        (&self.q * (x - &self.xstar)) * 2.0
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn condition_number(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }
}

/// Workspace, obstacles and objective.
///
/// Factor index `0` is the workspace shell and factor `i ≥ 1` is
/// `obstacles[i − 1]`; the same convention is used for awareness sets.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub workspace: WorkspaceSphere,
    pub obstacles: Vec<Obstacle>,
    pub objective: QuadraticObjective,
}

impl World {
    pub fn new(workspace: WorkspaceSphere, obstacles: Vec<Obstacle>, objective: QuadraticObjective) -> Result<Self> {
        let n = workspace.center.len();
        if objective.xstar.len() != n {
            return Err(NavError::DimensionMismatch { expected: n, got: objective.xstar.len() });
        }
        for o in &obstacles {
            if o.dim() != n {
                return Err(NavError::DimensionMismatch { expected: n, got: o.dim() });
            }
        }
        Ok(Self { workspace, obstacles, objective })
    }

    pub fn dim(&self) -> usize {
        self.workspace.center.len()
    }

    /// Number of `β` factors, workspace included.
    pub fn factor_count(&self) -> usize {
        self.obstacles.len() + 1
    }

    /// Characteristic length of the world (the workspace radius).
    pub fn scale(&self) -> f64 {
        self.workspace.radius
    }

    pub fn factor_value(&self, i: usize, x: &Point) -> f64 {
        if i == 0 {
            self.workspace.value(x)
        } else {
            self.obstacles[i - 1].value(x)
        }
    }

    pub fn factor_gradient(&self, i: usize, x: &Point) -> DVector<f64> {
        if i == 0 {
            self.workspace.gradient(x)
        } else {
            self.obstacles[i - 1].gradient(x)
        }
    }

    pub fn factor_values(&self, x: &Point) -> Vec<f64> {
        (0..self.factor_count()).map(|i| self.factor_value(i, x)).collect()
    }

    /// `β(x) = Π βᵢ(x)`.
    pub fn beta(&self, x: &Point) -> f64 {
        self.factor_values(x).iter().product()
    }

    /// Product-rule gradient `Σᵢ ∇βᵢ Π_{j≠i} βⱼ`.
    pub fn beta_gradient(&self, x: &Point) -> DVector<f64> {
        let values = self.factor_values(x);
        let grads: Vec<DVector<f64>> = (0..self.factor_count()).map(|i| self.factor_gradient(i, x)).collect();
        product_rule(&values, &grads, x.len())
    }

    /// True when every factor is strictly positive.
    pub fn in_free_interior(&self, x: &Point) -> bool {
        x.iter().all(|v| v.is_finite()) && self.factor_values(x).iter().all(|&b| b > 0.0)
    }

    /// Index (factor convention) of the first factor that is not positive.
    pub fn first_violation(&self, x: &Point) -> Option<usize> {
        (0..self.factor_count()).find(|&i| !(self.factor_value(i, x) > 0.0))
    }

    /// Projection onto factor `i`'s boundary (shell or obstacle).
    pub fn project(&self, i: usize, x: &Point) -> Result<Projection> {
        if i == 0 {
            self.workspace.project(x)
        } else {
            self.obstacles[i - 1].project(x).map_err(|e| match e {
                NavError::CollisionQuery { .. } => NavError::CollisionQuery { index: i },
                other => other,
            })
        }
    }

    /// Signed distance to obstacle `j` (zero-based), negative inside.
    ///
    /// Inside, the first-order estimate `−|β|/‖∇β‖` stands in for the
    /// penetration depth.
    pub fn obstacle_signed_distance(&self, j: usize, x: &Point) -> f64 {
        let o = &self.obstacles[j];
        let v = o.value(x);
        if v > boundary_tolerance(o.scale()) {
            if let Ok(p) = o.project(x) {
                return p.distance;
            }
        }
        if v >= 0.0 {
            return 0.0;
        }
        let g = o.gradient(x).norm();
        if g > 0.0 {
            -(-v) / g
        } else {
            -o.scale()
        }
    }

    /// Smallest signed distance to any obstacle.
    pub fn obstacle_clearance(&self, x: &Point) -> f64 {
        (0..self.obstacles.len())
            .map(|j| self.obstacle_signed_distance(j, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed distance to the free-space boundary, negative outside.
    pub fn clearance(&self, x: &Point) -> f64 {
        let shell = self.workspace.radius - (x - &self.workspace.center).norm();
        shell.min(self.obstacle_clearance(x))
    }
}

/// `Σᵢ gᵢ Π_{j≠i} vⱼ`, computed without dividing so zero factors are exact.
pub fn product_rule(values: &[f64], grads: &[DVector<f64>], dim: usize) -> DVector<f64> {
    let m = values.len();
    let mut prefix = vec![1.0; m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i] * values[i];
    }
    let mut suffix = vec![1.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] * values[i];
    }
    let mut out = DVector::zeros(dim);
    for i in 0..m {
        out += &grads[i] * (prefix[i] * suffix[i + 1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::obstacle::SphereObstacle;
    use crate::numeric::fd_gradient;
    use nalgebra::dvector;

    fn single_sphere_world() -> World {
        World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![Obstacle::Sphere(SphereObstacle::new(dvector![4.0, 0.0], 1.0).unwrap())],
            QuadraticObjective::isotropic(dvector![-5.0, 0.0], 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn beta_product_example() {
        assert_eq!(single_sphere_world().beta(&dvector![0.0, 0.0]), 6000.0);
    }

    #[test]
    fn beta_vanishes_on_boundaries() {
        let w = single_sphere_world();
        assert_eq!(w.beta(&dvector![5.0, 0.0]), 0.0);
        assert_eq!(w.beta(&dvector![0.0, 20.0]), 0.0);
    }

    #[test]
    fn beta_gradient_matches_finite_differences() {
        let w = single_sphere_world();
        for x in [dvector![0.0, 0.0], dvector![7.0, 3.0], dvector![-12.0, 9.0]] {
            let g = w.beta_gradient(&x);
            let fd = fd_gradient(|p| w.beta(p), &x, 1e-5);
            assert!((&g - &fd).norm() <= 1e-6 * g.norm());
        }
    }

    #[test]
    fn shell_projection_points_inward() {
        let w = single_sphere_world();
        let p = w.project(0, &dvector![15.0, 0.0]).unwrap();
        assert_eq!(p.point, dvector![20.0, 0.0]);
        assert_eq!(p.distance, 5.0);
        assert_eq!(p.normal, dvector![-1.0, 0.0]);
    }

    #[test]
    fn clearance_is_signed() {
        let w = single_sphere_world();
        assert!((w.clearance(&dvector![7.0, 0.0]) - 2.0).abs() < 1e-12);
        assert!((w.clearance(&dvector![4.5, 0.0]) + 0.5).abs() < 0.3);
        assert!(w.clearance(&dvector![4.5, 0.0]) < 0.0);
    }

    #[test]
    fn objective_spectrum() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 5.0]);
        let f = QuadraticObjective::new(dvector![0.0, 0.0], q, 1.0).unwrap();
        assert_eq!(f.condition_number(), 2.5);
        assert_eq!(f.value(&dvector![0.0, 0.0]), 1.0);
    }
}
