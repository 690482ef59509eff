//! Egg-shaped obstacles sensed through osculating circles. The circle model
//! is wrong away from the egg's sides, so the estimate is biased; this shows
//! the bias at a few points and then navigates.
//!
//! cargo run --release --example egg_world -- [world seed]

use stochnav::analysis::closed_form;
use stochnav::descent::{run_sgd, RunOptions, StepSchedule};
use stochnav::experiments::{campaign_starts, generate_egg_world, EggWorldParams};
use stochnav::potentials::{locate_minimum, Potential, PotentialSpec};
use stochnav::sensors::{EstimatorKind, NoiseModel, SensorRig};

fn main() -> stochnav::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let world = generate_egg_world(&EggWorldParams { seed, ..Default::default() })?;
    let spec = PotentialSpec::rimon_koditschek(15.0)?;
    let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
    let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 7)?.with_bound(10.0);

    let starts = campaign_starts(&world, 7, 0, 3, 0.2)?;
    for x in &starts {
        let cf = closed_form(&world, &rig, &spec, x)?;
        let grad = spec.gradient(&world, x)?;
        let rel = cf.bias.iter().map(|b| b * b).sum::<f64>().sqrt() / grad.norm();
        println!("at ({:.2}, {:.2}): ‖b_k‖/‖∇φ_k‖ = {rel:.3e}", x[0], x[1]);
    }

    let minimum = locate_minimum(&world, &spec)?;
    let schedule = StepSchedule::new(0.05, 5e-3)?;
    for (i, x0) in starts.iter().enumerate() {
        let traj = run_sgd(&world, &spec, &rig.with_seed(i as u64), &schedule, x0, &RunOptions::until(5000, 0.2, minimum.clone()))?;
        println!("start {i}: {:?} after {} steps, {} clipped", traj.status, traj.steps(), traj.clipped_steps);
    }
    Ok(())
}
