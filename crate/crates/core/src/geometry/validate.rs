//! Numerical checks that a world satisfies the standing geometric assumptions.

use serde::{Deserialize, Serialize};

use crate::geometry::world::World;

/// A single failed check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub message: String,
    /// Obstacle indices (zero-based) involved, if any.
    pub obstacles: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    /// Smallest sampled gap between two obstacles (`+∞` with fewer than two).
    pub min_pair_margin: f64,
    /// Smallest sampled gap between an obstacle and the workspace shell.
    pub min_containment_margin: f64,
    pub beta_at_goal: f64,
    pub fmin: f64,
    pub issues: Vec<ValidationIssue>,
}

/// Checks disjointness, containment, goal feasibility and `f_min ≥ 0`.
///
/// Margins come from `samples` boundary points per obstacle projected onto
/// the other obstacles, so they are upper bounds within sampling resolution.
pub fn validate_world(world: &World, samples: usize) -> ValidationReport {
    let samples = samples.max(1000);
    let m = world.obstacles.len();
    let boundaries: Vec<_> = world.obstacles.iter().map(|o| o.boundary_points(samples)).collect();
    let mut issues = Vec::new();

    // bounding discs let far boundary points skip the projection
    let discs: Vec<(crate::Point, f64)> = world
        .obstacles
        .iter()
        .zip(&boundaries)
        .map(|(o, b)| {
            let c = o.interior_point();
            let r = b.iter().map(|p| (p - &c).norm()).fold(0.0, f64::max);
            (c, 1.01 * r + 1e-9)
        })
        .collect();
    let side_margin = |from: usize, to: usize, mut margin: f64| {
        for p in &boundaries[from] {
            let lower = (p - &discs[to].0).norm() - discs[to].1;
            if lower < margin {
                margin = margin.min(world.obstacle_signed_distance(to, p));
            }
        }
        margin
    };

    let mut min_pair_margin = f64::INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            let margin = side_margin(j, i, side_margin(i, j, f64::INFINITY));
            // one obstacle swallowed by the other leaves no boundary crossing
            let nested = world.obstacles[j].value(&world.obstacles[i].interior_point()) < 0.0
                || world.obstacles[i].value(&world.obstacles[j].interior_point()) < 0.0;
            let margin = if nested { margin.min(-0.0) } else { margin };
            if !(margin > 0.0) {
                issues.push(ValidationIssue {
                    message: format!("obstacles intersect: {i} and {j}"),
                    obstacles: vec![i, j],
                });
            }
            min_pair_margin = min_pair_margin.min(margin);
        }
    }

    let mut min_containment_margin = f64::INFINITY;
    for (i, boundary) in boundaries.iter().enumerate() {
        let mut margin = f64::INFINITY;
        for p in boundary {
            margin = margin.min(world.workspace.radius - (p - &world.workspace.center).norm());
        }
        if !(margin > 0.0) {
            issues.push(ValidationIssue {
                message: format!("obstacle {i} is not inside the workspace interior"),
                obstacles: vec![i],
            });
        }
        min_containment_margin = min_containment_margin.min(margin);
    }

    let xstar = &world.objective.xstar;
    let beta_at_goal = world.beta(xstar);
    if !world.in_free_interior(xstar) {
        let offending: Vec<usize> =
            (0..m).filter(|&j| !(world.obstacles[j].value(xstar) > 0.0)).collect();
        issues.push(ValidationIssue { message: "goal x* is not in the free-space interior".into(), obstacles: offending });
    }
    let fmin = world.objective.fmin;
    if !(fmin >= 0.0) {
        issues.push(ValidationIssue { message: "objective minimum is negative".into(), obstacles: vec![] });
    }

    ValidationReport {
        passed: issues.is_empty(),
        min_pair_margin,
        min_containment_margin,
        beta_at_goal,
        fmin,
        issues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::obstacle::{Obstacle, SphereObstacle};
    use crate::geometry::world::{QuadraticObjective, WorkspaceSphere};
    use nalgebra::dvector;

    fn two_spheres(dx: f64) -> World {
        World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![
                Obstacle::Sphere(SphereObstacle::new(dvector![0.0, 0.0], 2.0).unwrap()),
                Obstacle::Sphere(SphereObstacle::new(dvector![dx, 0.0], 2.0).unwrap()),
            ],
            QuadraticObjective::isotropic(dvector![0.0, 10.0], 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn separated_spheres_pass_with_unit_margin() {
        let r = validate_world(&two_spheres(5.0), 1000);
        assert!(r.passed, "{r:?}");
        assert!((r.min_pair_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_spheres_fail() {
        let r = validate_world(&two_spheres(3.0), 1000);
        assert!(!r.passed);
        assert!(r.issues.iter().any(|i| i.message.contains("obstacles intersect") && i.obstacles == vec![0, 1]));
    }

    #[test]
    fn nested_obstacles_fail() {
        let mut w = two_spheres(5.0);
        w.obstacles[1] = Obstacle::Sphere(SphereObstacle::new(dvector![0.5, 0.0], 0.5).unwrap());
        assert!(!validate_world(&w, 1000).passed);
    }

    #[test]
    fn goal_inside_obstacle_fails() {
        let mut w = two_spheres(5.0);
        w.objective = QuadraticObjective::isotropic(dvector![0.5, 0.0], 0.0).unwrap();
        let r = validate_world(&w, 1000);
        assert!(r.issues.iter().any(|i| i.message.contains("goal")));
    }

    #[test]
    fn obstacle_crossing_the_shell_fails() {
        let mut w = two_spheres(5.0);
        w.obstacles[1] = Obstacle::Sphere(SphereObstacle::new(dvector![19.0, 0.0], 2.0).unwrap());
        let r = validate_world(&w, 1000);
        assert!(r.issues.iter().any(|i| i.message.contains("workspace")));
    }
}
