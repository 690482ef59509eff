//! Command-line front end: `validate`, `simulate`, `montecarlo`, `bias-diag`, `plot`.
//!
//! Exit codes are 0 on success, 1 when a checked property fails (collision,
//! failed condition, incomplete convergence) and 2 for usage or config errors.

mod config;
pub mod svg;

pub use config::{BiasConfig, RunConfig, WorldSource};

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use crate::analysis::{closed_form, monte_carlo_bias, saddle_quotient_check, scaled_bias_decay};
use crate::descent::{read_trajectory_csv, run_gradient_flow_baseline, write_trajectory_csv, RunOptions, RunStatus};
use crate::error::{NavError, Result};
use crate::experiments::{deviation_sweep, run_campaign, CampaignConfig, CampaignResult};
use crate::geometry::{validate_world, World};
use crate::potentials::{
    check_condition, default_seeds, find_critical_points, locate_minimum, ConditionReport, CriticalReport,
    PotentialSpec,
};
use crate::sensors::EstimatorKind;
use crate::Point;

#[derive(Debug, Parser)]
#[command(name = "stochnav", version, about = "Stochastic navigation-function descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check geometry, the curvature condition and the critical-point pattern.
    Validate(CommonArgs),
    /// Run stochastic descents on the first world and write trajectories.
    Simulate(CommonArgs),
    /// Run a campaign over all configured worlds.
    Montecarlo(CommonArgs),
    /// Tabulate closed-form and sampled bias over a grid.
    BiasDiag(CommonArgs),
    /// Draw the first world with trajectories from CSV files.
    Plot(PlotArgs),
}

/// Flags shared by every command; they override the config file.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration (JSON).
    pub config: PathBuf,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Order `k` of the potential.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Trajectory CSV files to overlay.
    #[arg(long = "traj")]
    pub trajectories: Vec<PathBuf>,
    /// Draw level curves of the potential.
    #[arg(long)]
    pub contours: bool,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl CommonArgs {
    /// Loads the config and applies flag overrides.
    pub fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.rig.seed = s;
        }
        if let Some(k) = self.k {
            cfg.potential.k = k;
        }
        if let Some(n) = self.steps {
            cfg.max_steps = n;
        }
        if let Some(n) = self.starts {
            cfg.starts = n;
        }
        if let Some(n) = self.seeds {
            cfg.seeds = n;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exit code for an error: 2 for usage and config problems, 1 otherwise.
pub fn error_code(e: &NavError) -> i32 {
    match e {
        NavError::Config { .. }
        | NavError::Json(_)
        | NavError::Io(_)
        | NavError::InvalidParameter(_)
        | NavError::Unsupported(_)
        | NavError::DimensionMismatch { .. } => 2,
        _ => 1,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Validate(a) => a.load().and_then(|c| cmd_validate(&c)),
        Command::Simulate(a) => a.load().and_then(|c| cmd_simulate(&c)),
        Command::Montecarlo(a) => a.load().and_then(|c| cmd_montecarlo(&c)),
        Command::BiasDiag(a) => a.load().and_then(|c| cmd_bias_diag(&c)),
        Command::Plot(a) => a.common.load().and_then(|c| cmd_plot(&c, &a.trajectories, a.contours)),
    };
    match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output)?;
    Ok(&cfg.output)
}

fn first_world(cfg: &RunConfig) -> Result<World> {
    Ok(cfg.worlds()?.swap_remove(0))
}

#[derive(Debug, Serialize)]
struct WorldCheck {
    world: usize,
    validation: crate::geometry::ValidationReport,
    condition: Option<ConditionReport>,
    condition_error: Option<String>,
    critical_points: CriticalReport,
    navigation_pattern: bool,
    passed: bool,
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.potential;
    let mut checks = Vec::new();
    for (w, world) in cfg.worlds()?.iter().enumerate() {
        let validation = validate_world(world, 1000);
        let (condition, condition_error) = match check_condition(world, 1000) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let critical_points = find_critical_points(world, &spec, &default_seeds(world, 20));
        let navigation_pattern = critical_points.is_navigation_pattern(world.obstacles.len());
        let passed = validation.passed && condition.as_ref().is_some_and(|c| c.passed) && navigation_pattern;
        println!(
            "world {w}: geometry {} (pair margin {:.4}, containment margin {:.4}); condition {}; critical points {}",
            if validation.passed { "ok" } else { "FAILED" },
            validation.min_pair_margin,
            validation.min_containment_margin,
            match &condition {
                Some(c) => format!("{} (N_cond {:.4}, κ(Q) {:.4})", if c.passed { "ok" } else { "FAILED" }, c.n_cond, c.condition_number),
                None => "not evaluated".into(),
            },
            if navigation_pattern { "ok" } else { "UNEXPECTED" }
        );
        for issue in &validation.issues {
            println!("  {issue:?}");
        }
        for p in &critical_points.points {
            println!("  {:?} at {:?} eigenvalues {:?}", p.kind, p.point, p.eigenvalues);
        }
        checks.push(WorldCheck { world: w, validation, condition, condition_error, critical_points, navigation_pattern, passed });
    }
    write_json(&output_dir(cfg)?.join("validate.json"), &checks)?;
    Ok(if checks.iter().all(|c| c.passed) { Outcome::Pass } else { Outcome::Fail })
}

fn campaign_config(cfg: &RunConfig) -> Result<CampaignConfig> {
    let mut c = CampaignConfig::new(cfg.potential, cfg.sensor_rig()?, cfg.step_schedule()?);
    c.starts = cfg.starts;
    c.start_points = cfg.start_points.iter().map(|p| DVector::from_vec(p.clone())).collect();
    c.seeds = cfg.seeds;
    c.max_steps = cfg.max_steps;
    c.stop_radius = cfg.stop_radius;
    Ok(c)
}

fn campaign_passed(r: &CampaignResult) -> bool {
    r.aggregates.runs > 0 && r.aggregates.successes == r.aggregates.runs && r.aggregates.collisions == 0
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let world = first_world(cfg)?;
    let mut camp = campaign_config(cfg)?;
    camp.diagnostics = true;
    camp.keep_trajectories = true;
    let result = run_campaign(std::slice::from_ref(&world), &camp);
    let dir = output_dir(cfg)?;
    let mut tracks = Vec::new();
    let mut baselines = Vec::new();
    if cfg.baseline {
        let minimum = locate_minimum(&world, &cfg.potential)?;
        let opts = RunOptions {
            max_steps: camp.baseline_max_steps,
            stop_radius: camp.stop_radius,
            target: Some(minimum),
            diagnostics: true,
        };
        let mut seen = Vec::new();
        for row in &result.rows {
            if row.x0.is_empty() || seen.contains(&row.start) {
                continue;
            }
            seen.push(row.start);
            let x0 = DVector::from_vec(row.x0.clone());
            if let Ok(b) = run_gradient_flow_baseline(&world, &cfg.potential, &x0, camp.baseline_step, &opts) {
                write_trajectory_csv(&b, &dir.join(format!("baseline_{}.csv", row.start)))?;
                baselines.push((row.start, b));
            }
        }
    }
    for (row, traj) in result.rows.iter().zip(&result.trajectories) {
        if let Some(t) = traj {
            write_trajectory_csv(t, &dir.join(format!("traj_{}_{}.csv", row.start, row.seed_index)))?;
            let m = row.metrics.as_ref().expect("finished runs have metrics");
            println!(
                "start {} seed {}: {:?} after {} steps, final distance {:.4}, min clearance {:.4}",
                row.start, row.seed_index, m.status, m.steps, m.final_distance_minimum, m.min_clearance
            );
        } else if let Some(e) = &row.error {
            println!("start {} seed {}: {e}", row.start, row.seed_index);
        }
    }
    for (row, traj) in result.rows.iter().zip(&result.trajectories) {
        if let Some(t) = traj {
            tracks.push(svg::Track { label: format!("start {} seed {}", row.start, row.seed_index), points: &t.iterates });
        }
    }
    for (s, b) in &baselines {
        tracks.push(svg::Track { label: format!("baseline {s}"), points: &b.iterates });
    }
    let contour = cfg.contours.then_some(&cfg.potential);
    std::fs::write(dir.join("plot.svg"), svg::render(&world, &tracks, contour))?;
    write_json(&dir.join("summary.json"), &result)?;
    let collided = result
        .rows
        .iter()
        .any(|r| r.metrics.as_ref().is_some_and(|m| matches!(m.status, RunStatus::Collision | RunStatus::Diverged)));
    let errored = result.rows.iter().any(|r| r.error.is_some());
    Ok(if collided || errored { Outcome::Fail } else { Outcome::Pass })
}

pub fn cmd_montecarlo(cfg: &RunConfig) -> Result<Outcome> {
    let worlds = cfg.worlds()?;
    let camp = campaign_config(cfg)?;
    let result = run_campaign(&worlds, &camp);
    let dir = output_dir(cfg)?;
    write_json(&dir.join("campaign.json"), &result)?;
    let a = &result.aggregates;
    println!(
        "{} runs: {} converged, {} collisions, {} at max steps, {} errors",
        a.runs, a.successes, a.collisions, a.max_steps_reached, a.errors
    );
    if !cfg.k_sweep.is_empty() {
        let rows = deviation_sweep(&worlds, &camp, &cfg.k_sweep)?;
        let mut csv = String::from("k,mean_deviation,success_rate\n");
        for r in &rows {
            let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            csv.push_str(&format!("{},{},{}\n", r.k, f(r.mean), f(r.success_rate)));
            println!("k = {}: mean deviation {}", r.k, f(r.mean));
        }
        std::fs::write(dir.join("deviation.csv"), csv)?;
        write_json(&dir.join("deviation.json"), &rows)?;
    }
    Ok(if campaign_passed(&result) { Outcome::Pass } else { Outcome::Fail })
}

/// Cell centres of an `n × n` grid over the workspace's bounding square
/// that lie in the free space.
pub fn probe_grid(world: &World, n: usize) -> Vec<Point> {
    let c = &world.workspace.center;
    let r = world.workspace.radius;
    let h = 2.0 * r / n as f64;
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let p = Point::from_vec(vec![c[0] - r + (i as f64 + 0.5) * h, c[1] - r + (j as f64 + 0.5) * h]);
            if world.in_free_interior(&p) {
                out.push(p);
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct BiasSummary {
    k: f64,
    points: usize,
    closed_form: bool,
    draws: usize,
    max_bias_norm: Option<f64>,
    max_scaled_norm: Option<f64>,
    max_z: Option<f64>,
    slopes: Vec<Option<f64>>,
}

pub fn cmd_bias_diag(cfg: &RunConfig) -> Result<Outcome> {
    let world = first_world(cfg)?;
    let rig = cfg.sensor_rig()?;
    let spec: PotentialSpec = cfg.potential;
    let closed = cfg.bias.closed_form;
    if closed && rig.estimator == EstimatorKind::EllipseFit {
        return Err(NavError::Config {
            field: "bias.closed_form".into(),
            message: "the closed form needs the circle-fit estimator; set it to false for sampling only".into(),
        });
    }
    if cfg.bias.draws > 0 && cfg.bias.draws < 10_000 {
        return Err(NavError::Config { field: "bias.draws".into(), message: "use 0 or at least 10000 draws".into() });
    }
    let dir = output_dir(cfg)?;
    let points = probe_grid(&world, cfg.bias.grid);
    let mut grid = String::from("x1,x2,b1,b2,scaled1,scaled2,mc1,mc2,se1,se2\n");
    let mut slopes_csv = String::from("x1,x2,slope,residual\n");
    let mut summary = BiasSummary {
        k: spec.k,
        points: points.len(),
        closed_form: closed,
        draws: cfg.bias.draws,
        max_bias_norm: None,
        max_scaled_norm: None,
        max_z: None,
        slopes: Vec::new(),
    };
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let upd = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.map_or(v, |s: f64| s.max(v)));
    for x in &points {
        let cf = if closed { Some(closed_form(&world, &rig, &spec, x)?) } else { None };
        let mc = if cfg.bias.draws > 0 { Some(monte_carlo_bias(&world, &rig, &spec, x, cfg.bias.draws)?) } else { None };
        let c = |i: usize| cf.as_ref().map(|c| c.bias[i]);
        let s = |i: usize| cf.as_ref().map(|c| c.scaled_bias[i]);
        let m = |i: usize| mc.as_ref().map(|m| m.bias[i]);
        let e = |i: usize| mc.as_ref().map(|m| m.bias_se[i]);
        grid.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            x[0],
            x[1],
            fmt(c(0)),
            fmt(c(1)),
            fmt(s(0)),
            fmt(s(1)),
            fmt(m(0)),
            fmt(m(1)),
            fmt(e(0)),
            fmt(e(1))
        ));
        if let Some(cf) = &cf {
            upd(&mut summary.max_bias_norm, DVector::from_vec(cf.bias.clone()).norm());
            upd(&mut summary.max_scaled_norm, DVector::from_vec(cf.scaled_bias.clone()).norm());
            if let Some(mc) = &mc {
                for i in 0..2 {
                    upd(&mut summary.max_z, (cf.bias[i] - mc.bias[i]).abs() / mc.bias_se[i].max(f64::MIN_POSITIVE));
                }
            }
            let fit = scaled_bias_decay(&world, &rig, &spec, x, &cfg.bias.ks)?;
            slopes_csv.push_str(&format!("{},{},{},{}\n", x[0], x[1], fmt(fit.slope), fmt(fit.residual)));
            summary.slopes.push(fit.slope);
        }
    }
    std::fs::write(dir.join("bias_grid.csv"), grid)?;
    if closed {
        std::fs::write(dir.join("slopes.csv"), slopes_csv)?;
    }
    if closed && cfg.bias.quotients {
        let table = saddle_quotient_check(&world, &rig, &spec, &cfg.bias.ks)?;
        std::fs::write(dir.join("quotients.csv"), table.to_csv())?;
        write_json(&dir.join("quotients.json"), &table)?;
    }
    write_json(&dir.join("bias_summary.json"), &summary)?;
    println!(
        "{} probe points; max ‖b_k‖ {}, max ‖b̃_k‖ {}, max |closed − MC|/SE {}",
        summary.points,
        fmt(summary.max_bias_norm),
        fmt(summary.max_scaled_norm),
        fmt(summary.max_z)
    );
    Ok(Outcome::Pass)
}

pub fn cmd_plot(cfg: &RunConfig, trajectories: &[PathBuf], contours: bool) -> Result<Outcome> {
    let world = first_world(cfg)?;
    let paths: Vec<(String, Vec<Point>)> = trajectories
        .iter()
        .map(|p| {
            let pts = read_trajectory_csv(p)?.into_iter().map(DVector::from_vec).collect();
            Ok((p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(), pts))
        })
        .collect::<Result<_>>()?;
    let tracks: Vec<svg::Track<'_>> = paths.iter().map(|(l, p)| svg::Track { label: l.clone(), points: p }).collect();
    let contour = (contours || cfg.contours).then_some(&cfg.potential);
    let dir = output_dir(cfg)?;
    std::fs::write(dir.join("plot.svg"), svg::render(&world, &tracks, contour))?;
    Ok(Outcome::Pass)
}
