//! Start exactly at a saddle of the potential. Noisy descents leave it and
//! reach the minimum; the noiseless exact-gradient run stays put.
//!
//! cargo run --release --example saddle_escape

use stochnav::descent::{run_sgd, saddle_escape_trial, RunOptions, StepSchedule};
use stochnav::experiments::{generate_elliptical_world, EllipticalWorldParams};
use stochnav::potentials::{default_seeds, find_critical_points, locate_minimum, CriticalKind, PotentialSpec};
use stochnav::sensors::{EstimatorKind, NoiseModel, SensorRig};

fn main() -> stochnav::Result<()> {
    let world = generate_elliptical_world(&EllipticalWorldParams::default())?;
    let spec = PotentialSpec::rimon_koditschek(7.0)?;
    let report = find_critical_points(&world, &spec, &default_seeds(&world, 20));
    let saddle = report.of_kind(CriticalKind::Saddle).next().expect("the world has saddles").clone();
    let xc = saddle.position();
    println!("saddle at ({:.4}, {:.4}), eigenvalues {:?}", xc[0], xc[1], saddle.eigenvalues);

    let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
    let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 5)?;
    let schedule = StepSchedule::new(0.05, 5e-3)?;
    let opts = RunOptions::until(5000, 0.2, locate_minimum(&world, &spec)?);
    let stats = saddle_escape_trial(&world, &spec, &rig, &schedule, &saddle, 50, &opts)?;
    println!("{}/{} noisy runs converged; {} left along +v, {} along −v", stats.converged, stats.trials, stats.positive_side, stats.negative_side);

    let exact = SensorRig::new(7.0, NoiseModel::noiseless(), EstimatorKind::ExactOracle, 0)?;
    let still = run_sgd(&world, &spec, &exact, &schedule, &xc, &RunOptions::fixed(10_000))?;
    let drift = still.iterates.iter().map(|x| (x - &xc).norm()).fold(0.0, f64::max);
    println!("noiseless exact descent: largest distance from the saddle over 10⁴ steps {drift:.2e}");
    Ok(())
}
