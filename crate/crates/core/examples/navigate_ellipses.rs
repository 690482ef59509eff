//! Stochastic descent in a generated elliptical world, compared against the
//! deterministic gradient flow, with an SVG of the paths.
//!
//! cargo run --release --example navigate_ellipses -- [world seed] [k]

use stochnav::cli::svg::{render, Track};
use stochnav::descent::{convergence_metrics, deviation, run_gradient_flow_baseline, run_sgd, RunOptions, StepSchedule};
use stochnav::experiments::{campaign_starts, generate_elliptical_world, EllipticalWorldParams};
use stochnav::potentials::{locate_minimum, PotentialSpec};
use stochnav::sensors::{EstimatorKind, NoiseModel, SensorRig};

fn main() -> stochnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let k: f64 = args.next().map_or(7.0, |s| s.parse().expect("k"));

    let world = generate_elliptical_world(&EllipticalWorldParams { seed, ..Default::default() })?;
    let spec = PotentialSpec::rimon_koditschek(k)?;
    let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
    let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 42)?;
    let schedule = StepSchedule::new(0.05, 5e-3)?;
    let minimum = locate_minimum(&world, &spec)?;
    let opts = RunOptions::until(5000, 0.2, minimum.clone());

    let starts = campaign_starts(&world, 42, 0, 5, 0.2)?;
    let mut paths = Vec::new();
    for (i, x0) in starts.iter().enumerate() {
        let traj = run_sgd(&world, &spec, &rig.with_seed(i as u64), &schedule, x0, &opts)?;
        let flow = run_gradient_flow_baseline(&world, &spec, x0, 0.02, &RunOptions::until(20_000, 0.2, minimum.clone()))?;
        let m = convergence_metrics(&traj, &world, &minimum, 0.2);
        println!(
            "start {i}: {:?} in {} steps, min clearance {:.3}, mean deviation from the flow {:.3}",
            m.status,
            m.steps,
            m.min_clearance,
            deviation(&traj.iterates, &flow.iterates)
        );
        paths.push(traj.iterates);
    }
    let tracks: Vec<Track> = paths.iter().enumerate().map(|(i, p)| Track { label: format!("start {i}"), points: p }).collect();
    std::fs::write("navigate_ellipses.svg", render(&world, &tracks, Some(&spec)))?;
    println!("wrote navigate_ellipses.svg");
    Ok(())
}
