//! Summary metrics and trajectory-to-baseline deviation.

use serde::{Deserialize, Serialize};

use crate::descent::{RunStatus, Trajectory};
use crate::geometry::World;
use crate::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMetrics {
    pub status: RunStatus,
    pub steps: usize,
    pub final_distance_goal: f64,
    pub final_distance_minimum: f64,
    pub path_length: f64,
    pub min_clearance: f64,
    pub min_obstacle_clearance: f64,
    /// First iterate index within `stop_radius` of the minimum.
    pub steps_to_stop: Option<usize>,
    pub max_phi: f64,
}

/// Metrics of a finished run against the goal `x*` and located minimum `x̄`.
pub fn convergence_metrics(traj: &Trajectory, world: &World, minimum: &Point, stop_radius: f64) -> ConvergenceMetrics {
    let last = traj.last();
    let path_length = traj.iterates.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum();
    let mut min_clearance = f64::INFINITY;
    let mut min_obstacle_clearance = f64::INFINITY;
    for x in &traj.iterates {
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        min_clearance = min_clearance.min(world.clearance(x));
        min_obstacle_clearance = min_obstacle_clearance.min(world.obstacle_clearance(x));
    }
    let steps_to_stop = traj.iterates.iter().position(|x| (x - minimum).norm() < stop_radius);
    let max_phi = traj.records.iter().map(|r| r.phi).filter(|p| p.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    ConvergenceMetrics {
        status: traj.status,
        steps: traj.steps(),
        final_distance_goal: (last - &world.objective.xstar).norm(),
        final_distance_minimum: (last - minimum).norm(),
        path_length,
        min_clearance,
        min_obstacle_clearance,
        steps_to_stop,
        max_phi,
    }
}

fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Mean over `path` of the distance to the nearest point of the `baseline`
/// polyline.
pub fn deviation(path: &[Point], baseline: &[Point]) -> f64 {
    if path.is_empty() || baseline.is_empty() {
        return f64::NAN;
    }
    let total: f64 = path
        .iter()
        .map(|p| {
            if baseline.len() == 1 {
                return (p - &baseline[0]).norm();
            }
            baseline
                .windows(2)
                .map(|w| segment_distance(p, &w[0], &w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / path.len() as f64
}
