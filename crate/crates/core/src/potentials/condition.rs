//! Sampled check of the per-obstacle validity condition.

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::World;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleCondition {
    /// Zero-based obstacle index.
    pub obstacle: usize,
    pub mu_min: f64,
    /// Largest sampled left-hand side.
    pub worst_lhs: f64,
    pub worst_point: Vec<f64>,
    /// Smallest sampled `μ(x_s) − lhs(x_s)`.
    pub margin: f64,
    /// Largest condition number this obstacle tolerates.
    pub n_cond: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_number: f64,
    pub obstacles: Vec<ObstacleCondition>,
    /// Largest `λ_max/λ_min` for which every obstacle passes.
    pub n_cond: f64,
    pub passed: bool,
}

/// Evaluates `(λ_max/λ_min)·∇βᵢ(x_s)ᵀ(x_s − x*)/‖x_s − x*‖² < μᵢ` over
/// `boundary_samples` points of each obstacle boundary.
///
/// `μᵢ` is the constant `μ_min^i` for spheres and ellipses and the local
/// tangential curvature form for eggs, so the test is applied pointwise.
pub fn check_condition(world: &World, boundary_samples: usize) -> Result<ConditionReport> {
    let xstar = &world.objective.xstar;
    if let Some(j) = (0..world.obstacles.len()).find(|&j| !(world.obstacles[j].value(xstar) > 0.0)) {
        return Err(NavError::CollisionQuery { index: j + 1 });
    }
    let kappa = world.objective.condition_number();
    let samples = boundary_samples.max(1000);
    let mut obstacles = Vec::with_capacity(world.obstacles.len());
    for (j, o) in world.obstacles.iter().enumerate() {
        let mut worst_lhs = f64::NEG_INFINITY;
        let mut worst_point = Vec::new();
        let mut margin = f64::INFINITY;
        let mut n_cond = f64::INFINITY;
        for p in o.boundary_points(samples) {
            let u = &p - xstar;
            let ratio = o.gradient(&p).dot(&u) / u.norm_squared();
            let lhs = kappa * ratio;
            let mu = o.curvature_constant_at(&p);
            if lhs > worst_lhs {
                worst_lhs = lhs;
                worst_point = p.iter().copied().collect();
            }
            margin = margin.min(mu - lhs);
            if ratio > 0.0 {
                n_cond = n_cond.min(mu / ratio);
            }
        }
        obstacles.push(ObstacleCondition {
            obstacle: j,
            mu_min: o.mu_min(),
            worst_lhs,
            worst_point,
            margin,
            n_cond,
            passed: margin > 0.0,
        });
    }
    let n_cond = obstacles.iter().map(|o| o.n_cond).fold(f64::INFINITY, f64::min);
    Ok(ConditionReport {
        condition_number: kappa,
        passed: obstacles.iter().all(|o| o.passed),
        obstacles,
        n_cond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{EllipseObstacle, Obstacle, QuadraticObjective, SphereObstacle, WorkspaceSphere};
    use nalgebra::{dvector, DMatrix};

    #[test]
    fn sphere_example_margin() {
        let w = World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![Obstacle::Sphere(SphereObstacle::new(dvector![4.0, 0.0], 1.0).unwrap())],
            QuadraticObjective::isotropic(dvector![0.0, 0.0], 0.0).unwrap(),
        )
        .unwrap();
        let r = check_condition(&w, 1000).unwrap();
        assert!(r.passed);
        let o = &r.obstacles[0];
        assert!((o.worst_lhs - 0.4).abs() < 1e-12);
        assert!((o.margin - 1.6).abs() < 1e-12);
        assert!((r.n_cond - 5.0).abs() < 1e-9);
        assert!((o.worst_point[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn flat_ellipse_behind_goal_fails() {
        let w = World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![Obstacle::Ellipse(
                EllipseObstacle::new(dvector![0.0, 1.5], DMatrix::from_diagonal(&dvector![1.0, 100.0]), 5.0).unwrap(),
            )],
            QuadraticObjective::isotropic(dvector![0.0, 0.0], 0.0).unwrap(),
        )
        .unwrap();
        assert!(!check_condition(&w, 2000).unwrap().passed);
    }

    #[test]
    fn goal_inside_obstacle_is_an_error() {
        let w = World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![Obstacle::Sphere(SphereObstacle::new(dvector![0.0, 0.0], 1.0).unwrap())],
            QuadraticObjective::isotropic(dvector![0.5, 0.0], 0.0).unwrap(),
        )
        .unwrap();
        assert!(check_condition(&w, 1000).is_err());
    }
}
