//! Stochastic runs started exactly at a saddle.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::descent::{run_sgd, RunOptions, RunStatus, StepSchedule};
use crate::error::{NavError, Result};
use crate::geometry::World;
use crate::numeric::{derive_seed, fd_jacobian, sym_eigen};
use crate::potentials::{CriticalKind, CriticalPoint, Potential, PotentialSpec};
use crate::sensors::SensorRig;
use crate::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeStats {
    pub trials: usize,
    pub converged: usize,
    /// Runs whose final iterate is still within `stop_radius` of the saddle.
    pub lingering: usize,
    pub collisions: usize,
    /// Runs leaving along `+v` and `−v` of the unstable direction `v`.
    pub positive_side: usize,
    pub negative_side: usize,
}

/// Eigenvector of the most negative Jacobian eigenvalue at a critical point.
pub fn unstable_direction(world: &World, spec: &PotentialSpec, x: &Point) -> DVector<f64> {
    let h = 1e-6 * world.scale();
    let jac = fd_jacobian(
        |p| spec.critical_residual(world, p).unwrap_or_else(|_| DVector::from_element(p.len(), f64::NAN)),
        x,
        h,
    );
    let sym = (&jac + jac.transpose()) * 0.5;
    let (_, vectors) = sym_eigen(&sym);
    vectors.column(0).into_owned()
}

/// Runs `trials` seeded stochastic descents from the saddle `x_c`.
#[allow(clippy::too_many_arguments)]
pub fn saddle_escape_trial(
    world: &World,
    spec: &PotentialSpec,
    rig: &SensorRig,
    schedule: &StepSchedule,
    saddle: &CriticalPoint,
    trials: usize,
    opts: &RunOptions,
) -> Result<EscapeStats> {
    if saddle.kind != CriticalKind::Saddle {
        return Err(NavError::InvalidParameter(format!("critical point is a {:?}, not a saddle", saddle.kind)));
    }
    let xc = saddle.position();
    let v = unstable_direction(world, spec, &xc);
    let mut stats =
        EscapeStats { trials, converged: 0, lingering: 0, collisions: 0, positive_side: 0, negative_side: 0 };
    for trial in 0..trials {
        let run_rig = rig.with_seed(derive_seed(&[rig.seed, 0x5AD, trial as u64]));
        let traj = run_sgd(world, spec, &run_rig, schedule, &xc, opts)?;
        match traj.status {
            RunStatus::Converged => stats.converged += 1,
            RunStatus::Collision => stats.collisions += 1,
            _ => {}
        }
        if (traj.last() - &xc).norm() < opts.stop_radius {
            stats.lingering += 1;
        }
        // side taken on first leaving a small ball around the saddle
        let exit = traj
            .iterates
            .iter()
            .find(|x| (*x - &xc).norm() > 0.05 * world.scale())
            .unwrap_or(traj.last());
        if (exit - &xc).dot(&v) >= 0.0 {
            stats.positive_side += 1;
        } else {
            stats.negative_side += 1;
        }
    }
    Ok(stats)
}
