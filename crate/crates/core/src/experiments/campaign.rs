//! Monte Carlo campaigns: many stochastic runs against their deterministic baselines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descent::{
    convergence_metrics, deviation, run_gradient_flow_baseline, run_sgd, ConvergenceMetrics, RunOptions, RunStatus,
    StepSchedule, Trajectory,
};
use crate::error::{NavError, Result};
use crate::geometry::World;
use crate::numeric::derive_seed;
use crate::potentials::{locate_minimum, PotentialSpec};
use crate::sensors::{sample_free_point, SensorRig};
use crate::Point;

const START_TAG: u64 = 0x57A;
const RUN_TAG: u64 = 0x2B0;

/// Everything except the worlds. The rig's seed is the campaign's master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub spec: PotentialSpec,
    pub rig: SensorRig,
    pub schedule: StepSchedule,
    /// Initial positions drawn per world.
    pub starts: usize,
    /// Noise seeds per start.
    pub seeds: usize,
    pub max_steps: usize,
    pub stop_radius: f64,
    /// Euler step of the baseline; its run stops within `max(stop_radius, h)` of `x̄`.
    pub baseline_step: f64,
    pub baseline_max_steps: usize,
    /// Minimum clearance of start points; `None` uses `r₀/100`.
    pub start_clearance: Option<f64>,
    /// Fixed start points used for every world instead of random ones.
    pub start_points: Vec<Point>,
    /// Per-iterate `φ` and clearance records (slower).
    pub diagnostics: bool,
    /// Keep every stochastic trajectory in the result.
    pub keep_trajectories: bool,
}

impl CampaignConfig {
    pub fn new(spec: PotentialSpec, rig: SensorRig, schedule: StepSchedule) -> Self {
        Self {
            spec,
            rig,
            schedule,
            starts: 5,
            seeds: 1,
            max_steps: 100,
            stop_radius: 0.2,
            baseline_step: 0.02,
            baseline_max_steps: 20_000,
            start_clearance: None,
            start_points: Vec::new(),
            diagnostics: false,
            keep_trajectories: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    /// Position in `(world, start, seed)` lexicographic order.
    pub run_id: usize,
    pub world: usize,
    pub start: usize,
    pub seed_index: usize,
    pub rig_seed: u64,
    pub x0: Vec<f64>,
    pub minimum: Vec<f64>,
    pub metrics: Option<ConvergenceMetrics>,
    /// Mean distance of the stochastic path to the baseline path.
    pub deviation: Option<f64>,
    pub baseline_status: Option<RunStatus>,
    pub success: bool,
    pub clipped_steps: usize,
    /// The stochastic run could not start.
    pub error: Option<String>,
    pub baseline_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearanceSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignAggregates {
    pub runs: usize,
    pub successes: usize,
    pub collisions: usize,
    pub diverged: usize,
    pub max_steps_reached: usize,
    pub errors: usize,
    /// `None` when there are no runs.
    pub success_rate: Option<f64>,
    pub mean_final_distance: Option<f64>,
    pub max_final_distance: Option<f64>,
    /// Distribution of per-run minimum obstacle clearance.
    pub min_clearance: Option<ClearanceSummary>,
    pub mean_deviation: Option<f64>,
    pub clip_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub rows: Vec<RunRow>,
    pub aggregates: CampaignAggregates,
    /// Stochastic trajectories in row order, when requested.
    #[serde(skip)]
    pub trajectories: Vec<Option<Trajectory>>,
}

impl CampaignResult {
    /// Rows of one world, in start then seed order.
    pub fn world_rows(&self, world: usize) -> impl Iterator<Item = &RunRow> {
        self.rows.iter().filter(move |r| r.world == world)
    }

    /// Mean deviation per world, skipping runs without one.
    pub fn deviation_by_world(&self, worlds: usize) -> Vec<Option<f64>> {
        (0..worlds)
            .map(|w| {
                let v: Vec<f64> = self.world_rows(w).filter_map(|r| r.deviation).collect();
                (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Aggregate statistics of a set of rows; every rate is `None` for no rows.
pub fn aggregate(rows: &[RunRow]) -> CampaignAggregates {
    let count = |s: RunStatus| rows.iter().filter(|r| r.metrics.as_ref().is_some_and(|m| m.status == s)).count();
    let metrics: Vec<&ConvergenceMetrics> = rows.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let finals: Vec<f64> = metrics.iter().map(|m| m.final_distance_minimum).collect();
    let mut clear: Vec<f64> = metrics.iter().map(|m| m.min_obstacle_clearance).filter(|c| !c.is_nan()).collect();
    clear.sort_by(f64::total_cmp);
    let deviations: Vec<f64> = rows.iter().filter_map(|r| r.deviation).collect();
    let steps: usize = metrics.iter().map(|m| m.steps).sum();
    let clipped: usize = rows.iter().map(|r| r.clipped_steps).sum();
    let successes = rows.iter().filter(|r| r.success).count();
    CampaignAggregates {
        runs: rows.len(),
        successes,
        collisions: count(RunStatus::Collision),
        diverged: count(RunStatus::Diverged),
        max_steps_reached: count(RunStatus::MaxSteps),
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        success_rate: (!rows.is_empty()).then(|| successes as f64 / rows.len() as f64),
        mean_final_distance: mean(&finals),
        max_final_distance: finals.iter().copied().reduce(f64::max),
        min_clearance: (!clear.is_empty()).then(|| ClearanceSummary {
            min: clear[0],
            q25: quantile(&clear, 0.25),
            median: quantile(&clear, 0.5),
            q75: quantile(&clear, 0.75),
            max: clear[clear.len() - 1],
        }),
        mean_deviation: mean(&deviations),
        clip_rate: (steps > 0).then(|| clipped as f64 / steps as f64),
    }
}

/// Start points of world `w`, reproducible from the master seed.
pub fn campaign_starts(world: &World, master: u64, w: usize, count: usize, clearance: f64) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[master, w as u64, START_TAG]));
    (0..count)
        .map(|_| {
            sample_free_point(world, &mut rng, clearance)
                .ok_or_else(|| NavError::InvalidParameter(format!("no free start with clearance {clearance}")))
        })
        .collect()
}

/// Noise seed of one run.
pub fn run_seed(master: u64, world: usize, start: usize, seed_index: usize) -> u64 {
    derive_seed(&[master, RUN_TAG, world as u64, start as u64, seed_index as u64])
}

struct Prepared {
    minimum: Point,
    starts: Vec<Point>,
    baselines: Vec<Result<Trajectory>>,
}

fn prepare(world: &World, w: usize, cfg: &CampaignConfig) -> Result<Prepared> {
    let minimum = locate_minimum(world, &cfg.spec)?;
    let clearance = cfg.start_clearance.unwrap_or(world.workspace.radius / 100.0);
    let starts = if cfg.start_points.is_empty() {
        campaign_starts(world, cfg.rig.seed, w, cfg.starts, clearance)?
    } else {
        cfg.start_points.clone()
    };
    let opts = RunOptions {
        max_steps: cfg.baseline_max_steps,
        stop_radius: cfg.stop_radius,
        target: Some(minimum.clone()),
        diagnostics: false,
    };
    let baselines = starts
        .par_iter()
        .map(|x0| run_gradient_flow_baseline(world, &cfg.spec, x0, cfg.baseline_step, &opts))
        .collect();
    Ok(Prepared { minimum, starts, baselines })
}

fn failed_row(run_id: usize, world: usize, start: usize, seed_index: usize, rig_seed: u64, error: String) -> RunRow {
    RunRow {
        run_id,
        world,
        start,
        seed_index,
        rig_seed,
        x0: Vec::new(),
        minimum: Vec::new(),
        metrics: None,
        deviation: None,
        baseline_status: None,
        success: false,
        clipped_steps: 0,
        error: Some(error),
        baseline_error: None,
    }
}

/// Runs stochastic descent and the baseline for every `(world, start, seed)`.
///
/// Runs execute in parallel; rows come back in run-id order, so the result
/// depends only on the inputs and the master seed. Failures of individual
/// runs are recorded in their row.
pub fn run_campaign(worlds: &[World], cfg: &CampaignConfig) -> CampaignResult {
    let prepared: Vec<Result<Prepared>> = worlds.par_iter().enumerate().map(|(w, world)| prepare(world, w, cfg)).collect();
    let starts = if cfg.start_points.is_empty() { cfg.starts } else { cfg.start_points.len() };
    let per_world = starts * cfg.seeds;
    let jobs: Vec<(usize, usize, usize)> = (0..worlds.len())
        .flat_map(|w| (0..starts).flat_map(move |s| (0..cfg.seeds).map(move |j| (w, s, j))))
        .collect();
    let outcomes: Vec<(RunRow, Option<Trajectory>)> = jobs
        .par_iter()
        .enumerate()
        .map(|(run_id, &(w, s, j))| {
            let rig_seed = run_seed(cfg.rig.seed, w, s, j);
            let prep = match &prepared[w] {
                Ok(p) => p,
                Err(e) => return (failed_row(run_id, w, s, j, rig_seed, e.to_string()), None),
            };
            let x0 = &prep.starts[s];
            let opts = RunOptions {
                max_steps: cfg.max_steps,
                stop_radius: cfg.stop_radius,
                target: Some(prep.minimum.clone()),
                diagnostics: cfg.diagnostics,
            };
            let traj = match run_sgd(&worlds[w], &cfg.spec, &cfg.rig.with_seed(rig_seed), &cfg.schedule, x0, &opts) {
                Ok(t) => t,
                Err(e) => return (failed_row(run_id, w, s, j, rig_seed, e.to_string()), None),
            };
            let metrics = convergence_metrics(&traj, &worlds[w], &prep.minimum, cfg.stop_radius);
            let baseline = prep.baselines[s].as_ref().ok();
            let row = RunRow {
                run_id,
                world: w,
                start: s,
                seed_index: j,
                rig_seed,
                x0: x0.iter().copied().collect(),
                minimum: prep.minimum.iter().copied().collect(),
                success: traj.status == RunStatus::Converged,
                deviation: baseline.map(|b| deviation(&traj.iterates, &b.iterates)),
                baseline_status: baseline.map(|b| b.status),
                clipped_steps: traj.clipped_steps,
                metrics: Some(metrics),
                error: None,
                baseline_error: prep.baselines[s].as_ref().err().map(|e| e.to_string()),
            };
            (row, cfg.keep_trajectories.then_some(traj))
        })
        .collect();
    debug_assert_eq!(outcomes.len(), worlds.len() * per_world);
    let (rows, trajectories): (Vec<RunRow>, Vec<Option<Trajectory>>) = outcomes.into_iter().unzip();
    let aggregates = aggregate(&rows);
    CampaignResult { rows, aggregates, trajectories }
}

/// One rung of a deviation-versus-order sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub k: f64,
    /// Mean deviation per world (averaged over its starts and seeds).
    pub per_world: Vec<Option<f64>>,
    pub mean: Option<f64>,
    pub success_rate: Option<f64>,
}

/// Repeats the campaign for each order `k` with identical worlds, starts and seeds.
pub fn deviation_sweep(worlds: &[World], cfg: &CampaignConfig, ks: &[f64]) -> Result<Vec<DeviationRow>> {
    ks.iter()
        .map(|&k| {
            let spec = cfg.spec.with_order(k)?;
            let result = run_campaign(worlds, &CampaignConfig { spec, keep_trajectories: false, ..cfg.clone() });
            let per_world = result.deviation_by_world(worlds.len());
            let vals: Vec<f64> = per_world.iter().flatten().copied().collect();
            Ok(DeviationRow { k, mean: mean(&vals), per_world, success_rate: result.aggregates.success_rate })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{generate_elliptical_world, EllipticalWorldParams};
    use crate::sensors::{EstimatorKind, NoiseModel};

    fn config() -> CampaignConfig {
        let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
        let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 11).unwrap();
        let mut cfg = CampaignConfig::new(
            PotentialSpec::rimon_koditschek(7.0).unwrap(),
            rig,
            StepSchedule::new(0.05, 5e-3).unwrap(),
        );
        cfg.starts = 2;
        cfg.seeds = 2;
        cfg.max_steps = 60;
        cfg
    }

    fn worlds() -> Vec<World> {
        (0..2).map(|seed| generate_elliptical_world(&EllipticalWorldParams { seed, ..Default::default() }).unwrap()).collect()
    }

    #[test]
    fn empty_campaign_has_undefined_rates() {
        let r = run_campaign(&[], &config());
        assert!(r.rows.is_empty());
        assert_eq!(r.aggregates.runs, 0);
        assert_eq!(r.aggregates.success_rate, None);
        assert_eq!(r.aggregates.mean_deviation, None);
    }

    #[test]
    fn rows_are_ordered_and_counts_add_up() {
        let r = run_campaign(&worlds(), &config());
        assert_eq!(r.rows.len(), 8);
        for (i, row) in r.rows.iter().enumerate() {
            assert_eq!(row.run_id, i);
            assert_eq!(row.world * 4 + row.start * 2 + row.seed_index, i);
        }
        let a = &r.aggregates;
        assert_eq!(a.successes + a.collisions + a.diverged + a.max_steps_reached + a.errors, a.runs);
        assert!(a.success_rate.is_some_and(|s| (0.0..=1.0).contains(&s)));
    }

    #[test]
    fn campaigns_are_deterministic() {
        let w = worlds();
        let a = serde_json::to_string(&run_campaign(&w, &config())).unwrap();
        let b = serde_json::to_string(&run_campaign(&w, &config())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn a_bad_world_is_recorded_not_fatal() {
        let mut cfg = config();
        cfg.start_clearance = Some(1e3);
        let r = run_campaign(&worlds()[..1], &cfg);
        assert_eq!(r.rows.len(), 4);
        assert!(r.rows.iter().all(|row| row.error.is_some() && !row.success));
        assert_eq!(r.aggregates.success_rate, Some(0.0));
    }
}
