//! A small Monte Carlo campaign over generated worlds, then the paired
//! comparison of deviations from the deterministic flow at two orders.
//!
//! cargo run --release --example campaign -- [worlds]

use stochnav::descent::StepSchedule;
use stochnav::experiments::{
    deviation_sweep, generate_elliptical_world, paired_sign_test, run_campaign, CampaignConfig, EllipticalWorldParams,
};
use stochnav::potentials::PotentialSpec;
use stochnav::sensors::{EstimatorKind, NoiseModel, SensorRig};

fn main() -> stochnav::Result<()> {
    let n: u64 = std::env::args().nth(1).map_or(20, |s| s.parse().expect("world count"));
    let worlds = (0..n)
        .map(|seed| generate_elliptical_world(&EllipticalWorldParams { seed, ..Default::default() }))
        .collect::<stochnav::Result<Vec<_>>>()?;
    let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
    let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 2024)?;
    let mut cfg = CampaignConfig::new(PotentialSpec::rimon_koditschek(7.0)?, rig, StepSchedule::new(0.05, 5e-3)?);
    cfg.max_steps = 5000;

    let result = run_campaign(&worlds, &cfg);
    println!("{}", serde_json::to_string_pretty(&result.aggregates).expect("aggregates serialise"));

    let rows = deviation_sweep(&worlds, &cfg, &[7.0, 12.0])?;
    let test = paired_sign_test(&rows[1].per_world, &rows[0].per_world);
    println!(
        "mean deviation k=7 {:.4}, k=12 {:.4}; k=12 closer in {} of {} worlds (sign test p = {:.2e})",
        rows[0].mean.unwrap_or(f64::NAN),
        rows[1].mean.unwrap_or(f64::NAN),
        test.wins,
        test.wins + test.losses,
        test.p_value
    );
    Ok(())
}
