//! The stochastic update `x_{t+1} = x_t − ε_t ĝ_t`, its deterministic
//! gradient-flow baseline and trajectory metrics.

mod csv;
mod metrics;
mod saddle;

pub use self::csv::{read_trajectory_csv, trajectory_csv, write_trajectory_csv};
pub use metrics::{convergence_metrics, deviation, ConvergenceMetrics};
pub use saddle::{saddle_escape_trial, unstable_direction, EscapeStats};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::World;
use crate::potentials::{Potential, PotentialSpec};
use crate::sensors::{estimate, SensorRig};
use crate::Point;

/// `ε_t = ε₀ / (1 + ζt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub eps0: f64,
    pub zeta: f64,
}

impl StepSchedule {
    pub fn new(eps0: f64, zeta: f64) -> Result<Self> {
        if !(eps0 > 0.0) || !eps0.is_finite() {
            return Err(NavError::InvalidParameter(format!("eps0 = {eps0} must be positive")));
        }
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(NavError::InvalidParameter(format!("zeta = {zeta} must be positive")));
        }
        Ok(Self { eps0, zeta })
    }

    pub fn step(&self, t: usize) -> f64 {
        self.eps0 / (1.0 + self.zeta * t as f64)
    }

    /// Checks `ε₀ < γ/B` for the non-collision guarantee.
    pub fn check_admissible(&self, gamma_min: f64, bound: f64) -> Result<()> {
        let limit = gamma_min / bound;
        if self.eps0 < limit {
            Ok(())
        } else {
            Err(NavError::InvalidParameter(format!(
                "eps0 = {} is not below gamma/B = {limit:.3e}",
                self.eps0
            )))
        }
    }

    /// `(Σ ε_t, Σ ε_t²)` over `t < steps`.
    pub fn partial_sums(&self, steps: usize) -> (f64, f64) {
        (0..steps).fold((0.0, 0.0), |(s, s2), t| {
            let e = self.step(t);
            (s + e, s2 + e * e)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxSteps,
    Collision,
    Diverged,
}

/// Diagnostics for iterate `x_t`; `eps` and `gnorm` describe the step taken
/// from it and are `None` for the final iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub eps: Option<f64>,
    pub gnorm: Option<f64>,
    pub beta: f64,
    pub phi: f64,
    pub clearance: f64,
    pub awareness: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<Point>,
    pub records: Vec<StepRecord>,
    /// `ĝ_t` applied at each step (one fewer than iterates).
    pub estimates: Vec<DVector<f64>>,
    pub status: RunStatus,
    pub clipped_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Point {
        self.iterates.last().expect("trajectory has a start point")
    }

    pub fn steps(&self) -> usize {
        self.estimates.len()
    }
}

/// Termination controls shared by the stochastic and baseline runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub max_steps: usize,
    /// Stop once within this distance of `target`; `0` runs all steps.
    pub stop_radius: f64,
    /// The located minimum `x̄`; `None` skips the stop test.
    pub target: Option<Point>,
    /// Record `φ` and clearance per iterate (costs one projection per obstacle).
    pub diagnostics: bool,
}

impl RunOptions {
    pub fn fixed(max_steps: usize) -> Self {
        Self { max_steps, stop_radius: 0.0, target: None, diagnostics: true }
    }

    pub fn until(max_steps: usize, stop_radius: f64, target: Point) -> Self {
        Self { max_steps, stop_radius, target: Some(target), diagnostics: true }
    }

    fn reached(&self, x: &Point) -> bool {
        matches!(&self.target, Some(t) if (x - t).norm() < self.stop_radius)
    }
}

fn record<P: Potential + ?Sized>(world: &World, pot: &P, x: &Point, t: usize, diagnostics: bool) -> StepRecord {
    let beta = world.beta(x);
    let (phi, clearance) = if diagnostics {
        (pot.value(world, x).unwrap_or(f64::NAN), world.clearance(x))
    } else {
        (f64::NAN, f64::NAN)
    };
    StepRecord { t, eps: None, gnorm: None, beta, phi, clearance, awareness: 0 }
}

fn collided(world: &World, x: &Point) -> bool {
    world.first_violation(x).is_some()
}

/// Stochastic descent from `x0` using the rig's estimates.
pub fn run_sgd(
    world: &World,
    spec: &PotentialSpec,
    rig: &SensorRig,
    schedule: &StepSchedule,
    x0: &Point,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if !world.in_free_interior(x0) {
        return Err(NavError::OutsideFreeSpace);
    }
    let mut x = x0.clone();
    let mut iterates = vec![x.clone()];
    let mut records = vec![record(world, spec, &x, 0, opts.diagnostics)];
    let mut estimates = Vec::new();
    let mut clipped_steps = 0;
    let mut status = RunStatus::MaxSteps;
    for t in 0..opts.max_steps {
        if opts.reached(&x) {
            status = RunStatus::Converged;
            break;
        }
        let g = estimate(world, rig, spec, &x, t as u64)?;
        let eps = schedule.step(t);
        if g.clipped {
            clipped_steps += 1;
        }
        let last = records.last_mut().expect("record per iterate");
        last.eps = Some(eps);
        last.gnorm = Some(g.direction.norm());
        last.awareness = g.awareness.len();
        x = &x - &g.direction * eps;
        estimates.push(g.direction);
        iterates.push(x.clone());
        if x.iter().any(|v| !v.is_finite()) {
            records.push(StepRecord {
                t: t + 1,
                eps: None,
                gnorm: None,
                beta: f64::NAN,
                phi: f64::NAN,
                clearance: f64::NAN,
                awareness: 0,
            });
            status = RunStatus::Diverged;
            break;
        }
        records.push(record(world, spec, &x, t + 1, opts.diagnostics || collided(world, &x)));
        if collided(world, &x) {
            status = RunStatus::Collision;
            break;
        }
    }
    if status == RunStatus::MaxSteps && opts.reached(&x) {
        status = RunStatus::Converged;
    }
    Ok(Trajectory { iterates, records, estimates, status, clipped_steps })
}

/// Explicit Euler on the exact normalised descent direction with step `h`.
pub fn run_gradient_flow_baseline<P: Potential + ?Sized>(
    world: &World,
    pot: &P,
    x0: &Point,
    h: f64,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if !world.in_free_interior(x0) {
        return Err(NavError::OutsideFreeSpace);
    }
    if !(h > 0.0) {
        return Err(NavError::InvalidParameter(format!("baseline step {h} must be positive")));
    }
    let mut x = x0.clone();
    let mut iterates = vec![x.clone()];
    let mut records = vec![record(world, pot, &x, 0, opts.diagnostics)];
    let mut estimates = Vec::new();
    let mut status = RunStatus::MaxSteps;
    // the Euler walk cannot resolve the target more finely than its own step
    let radius = opts.stop_radius.max(h);
    for t in 0..opts.max_steps {
        if matches!(&opts.target, Some(target) if (&x - target).norm() < radius) {
            status = RunStatus::Converged;
            break;
        }
        let d = pot.descent_direction(world, &x);
        let n = d.norm();
        if n == 0.0 {
            status = RunStatus::Converged;
            break;
        }
        let g = d / n;
        let last = records.last_mut().expect("record per iterate");
        last.eps = Some(h);
        last.gnorm = Some(1.0);
        x = &x - &g * h;
        estimates.push(g);
        iterates.push(x.clone());
        if x.iter().any(|v| !v.is_finite()) {
            status = RunStatus::Diverged;
            break;
        }
        records.push(record(world, pot, &x, t + 1, opts.diagnostics || collided(world, &x)));
        if collided(world, &x) {
            status = RunStatus::Collision;
            break;
        }
    }
    Ok(Trajectory { iterates, records, estimates, status, clipped_steps: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Obstacle, QuadraticObjective, SphereObstacle, WorkspaceSphere};
    use crate::potentials::locate_minimum;
    use crate::sensors::{EstimatorKind, NoiseModel};
    use nalgebra::dvector;

    fn world() -> World {
        World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![Obstacle::Sphere(SphereObstacle::new(dvector![0.0, 0.0], 3.0).unwrap())],
            QuadraticObjective::isotropic(dvector![0.0, -8.0], 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn schedule_sums() {
        let s = StepSchedule::new(0.05, 5e-3).unwrap();
        assert_eq!(s.step(0), 0.05);
        assert!(s.step(10) < s.step(9));
        let (s1, s2) = s.partial_sums(5000);
        // ε₀/ζ · ln(1 + ζT) ± ε₀ bounds the harmonic-type sum
        let integral = 0.05 / 5e-3 * (1.0 + 5e-3 * 5000.0_f64).ln();
        assert!(s1 > integral && s1 < integral + 0.05, "{s1} {integral}");
        // Σε² converges to at most ε₀² + ε₀²/ζ
        assert!(s2 < 0.05 * 0.05 * (1.0 + 1.0 / 5e-3));
        assert!(s.check_admissible(1e-3, 1.0).is_err());
        assert!(s.check_admissible(1.0, 1.0).is_ok());
    }

    #[test]
    fn update_identity_holds() {
        let w = world();
        let spec = PotentialSpec::rimon_koditschek(7.0).unwrap();
        let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
        let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 5).unwrap();
        let sched = StepSchedule::new(0.05, 5e-3).unwrap();
        let traj = run_sgd(&w, &spec, &rig, &sched, &dvector![0.0, 10.0], &RunOptions::fixed(100)).unwrap();
        assert_eq!(traj.status, RunStatus::MaxSteps);
        for t in 0..traj.steps() {
            let expected = &traj.iterates[t] - &traj.estimates[t] * sched.step(t);
            assert_eq!(traj.iterates[t + 1], expected);
            let rec = &traj.records[t];
            assert_eq!(rec.eps, Some(sched.step(t)));
            let moved = (&traj.iterates[t + 1] - &traj.iterates[t]).norm();
            assert!((moved - rec.eps.unwrap() * rec.gnorm.unwrap()).abs() <= 1e-12 * (1.0 + moved));
        }
    }

    #[test]
    fn zero_noise_stays_at_the_minimum() {
        let w = world();
        let spec = PotentialSpec::rimon_koditschek(7.0).unwrap();
        let rig = SensorRig::new(7.0, NoiseModel::noiseless(), EstimatorKind::ExactOracle, 0).unwrap();
        let target = locate_minimum(&w, &spec).unwrap();
        let sched = StepSchedule::new(0.05, 5e-3).unwrap();
        let traj = run_sgd(&w, &spec, &rig, &sched, &target, &RunOptions::fixed(200)).unwrap();
        assert!((traj.last() - &target).norm() < 1e-12);
    }

    #[test]
    fn baseline_reaches_minimum_without_obstacles() {
        let w = World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![],
            QuadraticObjective::isotropic(dvector![2.0, -3.0], 0.0).unwrap(),
        )
        .unwrap();
        let spec = PotentialSpec::rimon_koditschek(7.0).unwrap();
        let target = dvector![2.0, -3.0];
        let traj = run_gradient_flow_baseline(
            &w,
            &spec,
            &dvector![-10.0, 8.0],
            0.02,
            &RunOptions::until(10_000, 0.0, target.clone()),
        )
        .unwrap();
        assert_eq!(traj.status, RunStatus::Converged);
        let f: Vec<f64> = traj.iterates.iter().map(|x| w.objective.value(x)).collect();
        assert!(f.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn start_outside_is_an_error() {
        let w = world();
        let spec = PotentialSpec::rimon_koditschek(7.0).unwrap();
        let rig = SensorRig::new(7.0, NoiseModel::noiseless(), EstimatorKind::CircleFit, 0).unwrap();
        let sched = StepSchedule::new(0.05, 5e-3).unwrap();
        assert!(run_sgd(&w, &spec, &rig, &sched, &dvector![0.0, 1.0], &RunOptions::fixed(1)).is_err());
    }
}
