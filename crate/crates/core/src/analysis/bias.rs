//! Closed-form and Monte Carlo bias of the circle-fit estimator.
//!
//! With independent noise across quantities and obstacles, the expectation
//! of the product-rule estimate factorises. Writing `mᵢ` for the expected
//! normalised factor (one when the obstacle is not sensed) and `gᵢ` for the
//! expected normalised factor gradient,
//!
//! `E[ĝ] = h·Πmᵢ·(∇f₀ − w·Σ gᵢ/mᵢ)`, with `w = f₀/k` (RK) or `1/k` (LB),
//!
//! which equals `α(∇φ_k + b_k)` for
//! `α = h·Πmᵢ·s/β` and `b_k = (w·β/s)·(Σ ∇βᵢ/βᵢ − Σ gᵢ/mᵢ)`, where `s` is
//! the descent scale of the potential. Sensing by noisy reading makes each
//! obstacle's inclusion random near the range boundary; that is folded into
//! `mᵢ` and `gᵢ` using truncated Gaussian moments.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::World;
use crate::numeric::gauss_legendre;
use crate::potentials::{Potential, PotentialKind, PotentialSpec};
use crate::sensors::{draw, estimate_from, sense, EstimatorKind, LocalTruth, SensorRig};
use crate::Point;

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `E[n̂]·n` for `n̂ = (n + σξ)/|n + σξ|`, `ξ ~ N(0, I_dim)`, `|n| = 1`.
///
/// Uses `κ = A√(2/π)∫₀^{π/2} cosᵈθ·exp(−A² sin²θ/2) dθ` with `A = 1/σ`.
pub fn kappa(sigma: f64, dim: usize) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    let a = 1.0 / sigma;
    let upper = (14.0 / a).min(std::f64::consts::FRAC_PI_2);
    let f = |t: f64| t.cos().powi(dim as i32) * (-0.5 * a * a * t.sin().powi(2)).exp();
    a * (2.0 / std::f64::consts::PI).sqrt() * gauss_legendre(f, 0.0, upper, 64)
}

/// Expected normalised factor and gradient of one obstacle.
struct Expected {
    value: f64,
    gradient: DVector<f64>,
}

fn expected_circle(rig: &SensorRig, o: &crate::sensors::ObstacleTruth, l2: f64) -> Expected {
    let d = o.projection.distance;
    let r = o.radius;
    let n = &o.projection.normal;
    let rho = o.model_value + l2;
    let sigma = rig.noise.distance_sigma(d);
    let c = rig.range;
    if sigma == 0.0 {
        return if d <= c {
            Expected { value: o.model_value / rho, gradient: n * (2.0 * (d + r) / rho) }
        } else {
            Expected { value: 1.0, gradient: DVector::zeros(n.len()) }
        };
    }
    // Readings y = d + σz, clamped at zero and kept when y ≤ c.
    let a = -d / sigma;
    let b = (c - d) / sigma;
    let mass = cdf(b) - cdf(a);
    let p_in = cdf(b);
    let m1 = d * mass + sigma * (phi(a) - phi(b));
    let m2 = d * d * mass + 2.0 * d * sigma * (phi(a) - phi(b)) + sigma * sigma * (mass + a * phi(a) - b * phi(b));
    let er = r * cdf(r / sigma) + sigma * phi(r / sigma);
    let value = (m2 + 2.0 * er * m1) / rho + (1.0 - p_in);
    let grad = n * (2.0 * (m1 + p_in * er) * kappa(sigma, n.len()) / rho);
    Expected { value, gradient: grad }
}

fn expected_factors(world: &World, rig: &SensorRig, truth: &LocalTruth) -> Result<Vec<Expected>> {
    let x = &truth.x;
    let r2 = rig.workspace_reference(world);
    let v0 = world.workspace.value(x);
    let mut out = vec![Expected { value: v0 / (v0 + r2), gradient: world.workspace.gradient(x) / (v0 + r2) }];
    let l2 = rig.reference_length * rig.reference_length;
    match rig.estimator {
        EstimatorKind::CircleFit => out.extend(truth.obstacles.iter().map(|o| expected_circle(rig, o, l2))),
        EstimatorKind::ExactOracle => {
            for i in 1..world.factor_count() {
                let v = world.factor_value(i, x);
                out.push(Expected { value: v / (v + l2), gradient: world.factor_gradient(i, x) / (v + l2) });
            }
        }
        EstimatorKind::EllipseFit => {
            return Err(NavError::Unsupported("closed-form bias needs the circle-fit estimator".into()))
        }
    }
    Ok(out)
}

/// Closed-form `α`, `b_k` and scaled bias `s·b_k` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub alpha: f64,
    pub bias: Vec<f64>,
    pub scaled_bias: Vec<f64>,
    /// `Σ ∇βᵢ/βᵢ − Σ gᵢ/mᵢ`, the bracketed difference.
    pub bracket: Vec<f64>,
    /// `E[ĝ]` before clipping.
    pub mean_estimate: Vec<f64>,
}

fn weight(spec: &PotentialSpec, f0: f64) -> f64 {
    match spec.kind {
        PotentialKind::RimonKoditschek => f0 / spec.k,
        PotentialKind::LogBarrier => 1.0 / spec.k,
    }
}

/// Exact expectation of the unclipped estimate, decomposed as `α(∇φ_k + b_k)`.
///
/// Supported for the circle-fit estimator and the exact oracle (for which
/// `b_k = 0`). Objective noise is zero-mean and drops out. On the boundary
/// of the free space every field is returned as zero, the limit of `b_k`.
pub fn closed_form(world: &World, rig: &SensorRig, spec: &PotentialSpec, x: &Point) -> Result<ClosedForm> {
    let values = world.factor_values(x);
    if values.iter().all(|&b| b >= 0.0) && values.iter().any(|&b| b == 0.0) {
        let zero = vec![0.0; x.len()];
        return Ok(ClosedForm {
            alpha: 0.0,
            bias: zero.clone(),
            scaled_bias: zero.clone(),
            bracket: zero.clone(),
            mean_estimate: zero,
        });
    }
    let truth = sense(world, rig, x)?;
    let factors = expected_factors(world, rig, &truth)?;
    let f0 = truth.f0;
    let w = weight(spec, f0);
    let prod: f64 = factors.iter().map(|e| e.value).product();
    let mut expected_log = DVector::zeros(x.len());
    for e in &factors {
        expected_log += &e.gradient / e.value;
    }
    let gain = rig.gain(truth.grad_f0.norm());
    let mean = (&truth.grad_f0 - &expected_log * w) * (gain * prod);
    let beta = world.beta(x);
    let scale = spec.descent_scale(world, x)?;
    let exact_log = crate::potentials::log_beta_gradient(world, x);
    let bracket = exact_log - expected_log;
    let scaled = &bracket * (w * beta);
    Ok(ClosedForm {
        alpha: gain * prod * scale / beta,
        bias: (&scaled / scale).iter().copied().collect(),
        scaled_bias: scaled.iter().copied().collect(),
        bracket: bracket.iter().copied().collect(),
        mean_estimate: mean.iter().copied().collect(),
    })
}

/// Closed-form `b_k(x)`.
pub fn closed_form_bias(world: &World, rig: &SensorRig, spec: &PotentialSpec, x: &Point) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(closed_form(world, rig, spec, x)?.bias))
}

/// `s(x)·b_k(x)`, which stays of moderate size where `φ_k` is flat.
pub fn scaled_bias(world: &World, rig: &SensorRig, spec: &PotentialSpec, x: &Point) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(closed_form(world, rig, spec, x)?.scaled_bias))
}

/// `α(x)` used to read a Monte Carlo mean as `∇φ_k + b_k`.
///
/// Closed form where available. For the ellipse fit the noise-free model
/// values stand in for the expected factors, which is only approximate.
pub fn alpha(world: &World, rig: &SensorRig, spec: &PotentialSpec, x: &Point) -> Result<f64> {
    if rig.estimator != EstimatorKind::EllipseFit {
        return Ok(closed_form(world, rig, spec, x)?.alpha);
    }
    let truth = sense(world, rig, x)?;
    let l2 = rig.reference_length * rig.reference_length;
    let r2 = rig.workspace_reference(world);
    let v0 = world.workspace.value(x);
    let mut prod = v0 / (v0 + r2);
    for o in &truth.obstacles {
        if o.projection.distance <= rig.range {
            prod *= o.model_value / (o.model_value + l2);
        }
    }
    let beta = world.beta(x);
    Ok(rig.gain(truth.grad_f0.norm()) * prod * spec.descent_scale(world, x)? / beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloBias {
    pub draws: usize,
    /// Sample mean of the unclipped estimate and its standard error.
    pub mean_estimate: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub alpha: f64,
    /// `mean/α − ∇φ_k` with its standard error.
    pub bias: Vec<f64>,
    pub bias_se: Vec<f64>,
    /// `mean − α∇φ_k`.
    pub raw: Vec<f64>,
}

const MC_CHUNK: usize = 4096;

/// Sample mean and standard error of unclipped estimates at `x` over steps
/// `0..draws`. Chunks run in parallel and are merged in order, so the
/// result does not depend on the thread count.
pub fn sample_estimates(
    world: &World,
    rig: &SensorRig,
    spec: &PotentialSpec,
    x: &Point,
    draws: usize,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if draws < 2 {
        return Err(NavError::InvalidParameter("need at least two draws".into()));
    }
    let truth = sense(world, rig, x)?;
    let rig = rig.with_bound(f64::INFINITY);
    let n = x.len();
    let chunks: Vec<usize> = (0..draws.div_ceil(MC_CHUNK)).collect();
    let partial: Result<Vec<(DVector<f64>, DVector<f64>)>> = chunks
        .par_iter()
        .map(|&c| {
            let mut s = DVector::zeros(n);
            let mut s2 = DVector::zeros(n);
            for t in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(draws) {
                let m = draw(&truth, &rig, t as u64);
                let g = estimate_from(world, &rig, spec, &m)?.direction;
                s2 += g.component_mul(&g);
                s += g;
            }
            Ok((s, s2))
        })
        .collect();
    let mut s = DVector::zeros(n);
    let mut s2 = DVector::zeros(n);
    for (a, b) in partial? {
        s += a;
        s2 += b;
    }
    let nd = draws as f64;
    let mean = &s / nd;
    let var = (s2 / nd - mean.component_mul(&mean)) * (nd / (nd - 1.0));
    let se = var.map(|v| (v.max(0.0) / nd).sqrt());
    Ok((mean, se))
}

/// Monte Carlo estimate of `b_k(x)` from `draws` independent measurements.
pub fn monte_carlo_bias(
    world: &World,
    rig: &SensorRig,
    spec: &PotentialSpec,
    x: &Point,
    draws: usize,
) -> Result<MonteCarloBias> {
    let (mean, se) = sample_estimates(world, rig, spec, x, draws)?;
    let a = alpha(world, rig, spec, x)?;
    let grad = spec.gradient(world, x)?;
    let bias = &mean / a - &grad;
    let raw = &mean - &grad * a;
    let to_vec = |v: DVector<f64>| v.iter().copied().collect::<Vec<_>>();
    Ok(MonteCarloBias {
        draws,
        bias_se: to_vec(&se / a),
        mean_estimate: to_vec(mean),
        mean_se: to_vec(se),
        alpha: a,
        bias: to_vec(bias),
        raw: to_vec(raw),
    })
}

/// Closed-form and Monte Carlo bias at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub x: Vec<f64>,
    pub k: f64,
    pub awareness: Vec<usize>,
    pub gradient: Vec<f64>,
    pub closed_form: Option<ClosedForm>,
    pub monte_carlo: Option<MonteCarloBias>,
    /// Largest `|closed − MC|/SE` over components, when both are present.
    pub max_z: Option<f64>,
}

pub fn bias_report(
    world: &World,
    rig: &SensorRig,
    spec: &PotentialSpec,
    x: &Point,
    draws: Option<usize>,
) -> Result<BiasReport> {
    let closed = match closed_form(world, rig, spec, x) {
        Ok(c) => Some(c),
        Err(NavError::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let mc = draws.map(|d| monte_carlo_bias(world, rig, spec, x, d)).transpose()?;
    let max_z = match (&closed, &mc) {
        (Some(c), Some(m)) => Some(
            c.bias
                .iter()
                .zip(&m.bias)
                .zip(&m.bias_se)
                .map(|((a, b), s)| (a - b).abs() / s.max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max),
        ),
        _ => None,
    };
    Ok(BiasReport {
        x: x.iter().copied().collect(),
        k: spec.k,
        awareness: crate::sensors::awareness_set(world, rig, x)?,
        gradient: spec.gradient(world, x)?.iter().copied().collect(),
        closed_form: closed,
        monte_carlo: mc,
        max_z,
    })
}
