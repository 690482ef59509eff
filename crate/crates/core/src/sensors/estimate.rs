//! Gradient estimates assembled from noisy readings.
//!
//! Each factor of the obstacle product is divided by a deterministic
//! normaliser `ρᵢ(x)` before combining: `β̃ᵢ(x) + ℓ²` for sensed obstacles,
//! where `β̃ᵢ` is the noise-free value of the fitted model and `ℓ` the rig's
//! reference length, and `β₀(x) + r₀²` for the workspace shell. The exact
//! oracle uses `βᵢ(x) + ℓ²`. Factors then stay in `[0, 1)` and the estimate
//! magnitude does not depend on how many obstacles are in range. Normalisers
//! are positive and noise-free, so the estimate keeps the form
//! `E[ĝ] = α(x)(∇φ_k + b_k)` with a rescaled `α`.

use nalgebra::DVector;

use crate::error::{NavError, Result};
use crate::geometry::{product_rule, World};
use crate::potentials::{PotentialKind, PotentialSpec};
use crate::sensors::measure::{measure, Measurements};
use crate::sensors::{EstimatorKind, SensorRig};
use crate::Point;

/// One normalised factor `(βᵢ/ρᵢ, ∇βᵢ/ρᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub value: f64,
    pub gradient: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub direction: DVector<f64>,
    /// Norm before clipping.
    pub raw_norm: f64,
    pub awareness: Vec<usize>,
    pub clipped: bool,
    /// Readings clamped at zero (distance, radius or fitted `β̂`).
    pub clamped: usize,
}

/// `ĝ` from a noisy objective reading and normalised factors.
pub fn combine(kind: PotentialKind, k: f64, f0: f64, grad_f0: &DVector<f64>, factors: &[Factor]) -> DVector<f64> {
    let values: Vec<f64> = factors.iter().map(|f| f.value).collect();
    let grads: Vec<DVector<f64>> = factors.iter().map(|f| f.gradient.clone()).collect();
    let prod: f64 = values.iter().product();
    let pr = product_rule(&values, &grads, grad_f0.len());
    match kind {
        PotentialKind::RimonKoditschek => grad_f0 * prod - pr * (f0 / k),
        PotentialKind::LogBarrier => grad_f0 * prod - pr / k,
    }
}

fn workspace_factor(world: &World, rig: &SensorRig, x: &Point) -> Factor {
    let v = world.workspace.value(x);
    let rho = v + rig.workspace_reference(world);
    Factor { value: v / rho, gradient: world.workspace.gradient(x) / rho }
}

fn exact_factors(world: &World, rig: &SensorRig, x: &Point) -> Vec<Factor> {
    let l2 = rig.reference_length * rig.reference_length;
    let r2 = rig.workspace_reference(world);
    (0..world.factor_count())
        .map(|i| {
            let v = world.factor_value(i, x);
            let rho = v + if i == 0 { r2 } else { l2 };
            Factor { value: v / rho, gradient: world.factor_gradient(i, x) / rho }
        })
        .collect()
}

fn circle_factors(world: &World, rig: &SensorRig, m: &Measurements) -> Result<(Vec<Factor>, usize)> {
    let l2 = rig.reference_length * rig.reference_length;
    let mut out = vec![workspace_factor(world, rig, &m.x)];
    for r in &m.readings {
        if !r.radius.is_finite() {
            return Err(NavError::Unsupported("circle fitting needs curvature readings".into()));
        }
        let d = r.distance;
        let rho = r.model_value + l2;
        out.push(Factor {
            value: (d * d + 2.0 * r.radius * d) / rho,
            gradient: &r.normal * (2.0 * (d + r.radius) / rho),
        });
    }
    Ok((out, m.clamp_count()))
}

fn ellipse_factors(world: &World, rig: &SensorRig, m: &Measurements) -> Result<(Vec<Factor>, usize)> {
    let l2 = rig.reference_length * rig.reference_length;
    let mut out = vec![workspace_factor(world, rig, &m.x)];
    let mut clamped = m.clamp_count();
    for r in &m.readings {
        let e = r
            .ellipse
            .as_ref()
            .ok_or_else(|| NavError::Unsupported("ellipse fitting needs ellipse readings".into()))?;
        let u = &m.x - &e.center;
        let au = &e.matrix * &u;
        let mut value = u.dot(&au) - e.radius * e.radius;
        if value < 0.0 {
            value = 0.0;
            clamped += 1;
        }
        let rho = r.model_value + l2;
        out.push(Factor { value: value / rho, gradient: au * (2.0 / rho) });
    }
    Ok((out, clamped))
}

fn finish(direction: DVector<f64>, rig: &SensorRig, awareness: Vec<usize>, clamped: usize) -> GradientEstimate {
    let raw_norm = direction.norm();
    let clipped = raw_norm > rig.bound;
    let direction = if clipped { direction * (rig.bound / raw_norm) } else { direction };
    GradientEstimate { direction, raw_norm, awareness, clipped, clamped }
}

fn estimate_with(
    world: &World,
    rig: &SensorRig,
    m: &Measurements,
    kind: PotentialKind,
    k: f64,
    model: EstimatorKind,
) -> Result<GradientEstimate> {
    let (factors, clamped) = match model {
        EstimatorKind::ExactOracle => (exact_factors(world, rig, &m.x), 0),
        EstimatorKind::CircleFit => circle_factors(world, rig, m)?,
        EstimatorKind::EllipseFit => ellipse_factors(world, rig, m)?,
    };
    let g = combine(kind, k, m.f0, &m.grad_f0, &factors) * m.gain;
    Ok(finish(g, rig, m.awareness.clone(), clamped))
}

/// Rimon-Koditschek estimate with circle-fitted obstacles.
pub fn circle_fit_estimate(world: &World, rig: &SensorRig, m: &Measurements, k: f64) -> Result<GradientEstimate> {
    estimate_with(world, rig, m, PotentialKind::RimonKoditschek, k, EstimatorKind::CircleFit)
}

/// Rimon-Koditschek estimate with ellipse-fitted obstacles.
pub fn ellipse_fit_estimate(world: &World, rig: &SensorRig, m: &Measurements, k: f64) -> Result<GradientEstimate> {
    estimate_with(world, rig, m, PotentialKind::RimonKoditschek, k, EstimatorKind::EllipseFit)
}

/// Logarithmic-barrier estimate using the rig's obstacle model.
pub fn log_barrier_estimate(world: &World, rig: &SensorRig, m: &Measurements, k: f64) -> Result<GradientEstimate> {
    estimate_with(world, rig, m, PotentialKind::LogBarrier, k, rig.estimator)
}

/// Estimate from existing measurements for any potential and estimator.
pub fn estimate_from(world: &World, rig: &SensorRig, spec: &PotentialSpec, m: &Measurements) -> Result<GradientEstimate> {
    estimate_with(world, rig, m, spec.kind, spec.k, rig.estimator)
}

/// Measures at `x` on step `t` and returns the estimate.
pub fn estimate(world: &World, rig: &SensorRig, spec: &PotentialSpec, x: &Point, t: u64) -> Result<GradientEstimate> {
    let m = measure(world, rig, x, t)?;
    estimate_from(world, rig, spec, &m)
}
