//! Closed-form bias of the circle-fit estimate against Monte Carlo, and the
//! decay of the scaled bias with the order k at an interior point and at the
//! saddles.
//!
//! cargo run --release --example bias_diagnostics

use nalgebra::dvector;
use stochnav::analysis::{bias_report, saddle_bias_decay, scaled_bias_decay};
use stochnav::experiments::{generate_elliptical_world, EllipticalWorldParams};
use stochnav::potentials::PotentialSpec;
use stochnav::sensors::{EstimatorKind, NoiseModel, SensorRig};

fn main() -> stochnav::Result<()> {
    let world = generate_elliptical_world(&EllipticalWorldParams::default())?;
    let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 };
    let rig = SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 1)?;
    let spec = PotentialSpec::rimon_koditschek(8.0)?;
    let x = dvector![2.0, -3.0];

    let report = bias_report(&world, &rig, &spec, &x, Some(50_000))?;
    let cf = report.closed_form.as_ref().expect("circle fit has a closed form");
    let mc = report.monte_carlo.as_ref().expect("draws requested");
    println!("aware of obstacles {:?}", report.awareness);
    println!("closed form b_k = [{:.4e}, {:.4e}]", cf.bias[0], cf.bias[1]);
    println!("Monte Carlo b_k = [{:.4e}, {:.4e}] ± [{:.1e}, {:.1e}]", mc.bias[0], mc.bias[1], mc.bias_se[0], mc.bias_se[1]);
    println!("largest |difference|/SE = {:.2}", report.max_z.unwrap_or(f64::NAN));

    let ks = [8.0, 16.0, 32.0, 64.0];
    let fit = scaled_bias_decay(&world, &rig, &spec, &x, &ks)?;
    println!("‖b̃_k‖ over k = {ks:?}: {:?}, log-log slope {:.3}", fit.norms, fit.slope.unwrap_or(f64::NAN));
    for (track, fit) in saddle_bias_decay(&world, &rig, &spec, &ks)? {
        let p = &track.points[0];
        println!("saddle near ({:.2}, {:.2}): slope {:.3}", p[0], p[1], fit.slope.unwrap_or(f64::NAN));
    }
    Ok(())
}
