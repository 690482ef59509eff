//! Log-barrier and Rimon-Koditschek descents from the same starts with the
//! same noise: the barrier's paths pass closer to the obstacles.
//!
//! cargo run --release --example log_barrier -- [world seed]

use stochnav::descent::{convergence_metrics, run_sgd, RunOptions, StepSchedule};
use stochnav::experiments::{campaign_starts, generate_elliptical_world, EllipticalWorldParams};
use stochnav::potentials::{locate_minimum, PotentialSpec};
use stochnav::sensors::{EstimatorKind, NoiseModel, SensorRig};

fn main() -> stochnav::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let world = generate_elliptical_world(&EllipticalWorldParams { seed, ..Default::default() })?;
    let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
    let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 3)?;
    let schedule = StepSchedule::new(0.05, 5e-3)?;
    let starts = campaign_starts(&world, 3, 0, 5, 0.2)?;

    let suites = [
        ("Rimon-Koditschek k=7", PotentialSpec::rimon_koditschek(7.0)?, rig.clone()),
        ("log barrier k=10", PotentialSpec::log_barrier(10.0)?, rig.clone().with_gain_reference(10.0)),
    ];
    for (name, spec, rig) in &suites {
        let minimum = locate_minimum(&world, spec)?;
        println!("{name}:");
        for (i, x0) in starts.iter().enumerate() {
            let traj = run_sgd(&world, spec, &rig.with_seed(i as u64), &schedule, x0, &RunOptions::until(5000, 0.2, minimum.clone()))?;
            let m = convergence_metrics(&traj, &world, &minimum, 0.2);
            println!("  start {i}: {:?}, min obstacle clearance {:.3}", m.status, m.min_obstacle_clearance);
        }
    }
    Ok(())
}
