//! Local noisy sensing and gradient estimates.
//!
//! Noise is drawn from counter-based substreams: every scalar or vector
//! quantity for obstacle `i` at step `t` has its own generator seeded from
//! `(seed, t, i, quantity)`. Measurements are therefore reproducible bit for
//! bit and independent of the order in which obstacles are sensed.

mod calibrate;
mod estimate;
mod measure;

pub use calibrate::{estimate_bound, estimate_gamma, sample_free_point, GammaReport};
pub use estimate::{
    circle_fit_estimate, combine, ellipse_fit_estimate, estimate, estimate_from, log_barrier_estimate, Factor,
    GradientEstimate,
};
pub use measure::{awareness_set, draw, measure, sense, EllipseReading, LocalTruth, Measurements, ObstacleTruth, Reading};

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Exact obstacle functions for every obstacle; only `f₀` and `∇f₀` are noisy.
    ExactOracle,
    /// Each sensed obstacle replaced by its osculating circle.
    CircleFit,
    /// Each sensed obstacle replaced by a fitted ellipse.
    EllipseFit,
}

/// Zero-mean Gaussian noise levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_f0: f64,
    pub sigma_grad_f0: f64,
    /// Gain `η` in `σ = η·d^p` for distance, radius and normal noise.
    pub eta: f64,
    /// Exponent `p` in `σ = η·d^p`.
    pub exponent: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { sigma_f0: 0.0, sigma_grad_f0: 0.0, eta: 0.0, exponent: 1.0 }
    }

    /// Standard deviation of distance-type measurements at distance `d`.
    pub fn distance_sigma(&self, d: f64) -> f64 {
        if d <= 0.0 {
            0.0
        } else {
            self.eta * d.powf(self.exponent)
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_f0", self.sigma_f0),
            ("sigma_gradf0", self.sigma_grad_f0),
            ("eta", self.eta),
            ("distance_noise_exponent", self.exponent),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(NavError::Config { field: name.into(), message: format!("must be non-negative, got {v}") });
            }
        }
        Ok(())
    }
}

/// Default `g_ref`.
pub const DEFAULT_GAIN_REFERENCE: f64 = f64::INFINITY;

/// Sensing range, noise, estimator and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRig {
    pub range: f64,
    pub noise: NoiseModel,
    pub estimator: EstimatorKind,
    pub seed: u64,
    /// Length `ℓ`; obstacle factors are divided by `β̃ᵢ(x) + ℓ²`. Defaults to `c/4`.
    pub reference_length: f64,
    /// Norm bound `B`; estimates above it are clipped.
    pub bound: f64,
    /// Gradient scale `g_ref` of the gain `g_ref/√(g_ref² + ‖∇f₀(x)‖²)`; `∞` disables it.
    pub gain_reference: f64,
}

impl SensorRig {
    pub fn new(range: f64, noise: NoiseModel, estimator: EstimatorKind, seed: u64) -> Result<Self> {
        if !(range > 0.0) || !range.is_finite() {
            return Err(NavError::Config { field: "range_c".into(), message: format!("must be positive, got {range}") });
        }
        noise.validate()?;
        Ok(Self { range, noise, estimator, seed, reference_length: range / 4.0, bound: f64::INFINITY, gain_reference: DEFAULT_GAIN_REFERENCE })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }

    pub fn with_reference_length(mut self, length: f64) -> Self {
        self.reference_length = length;
        self
    }

    pub fn with_gain_reference(mut self, g_ref: f64) -> Self {
        self.gain_reference = g_ref;
        self
    }

    /// Reference added to `β₀` before dividing by it: `r₀²`, so the
    /// workspace factor is at most one half.
    pub fn workspace_reference(&self, world: &World) -> f64 {
        world.workspace.radius * world.workspace.radius
    }

    /// Deterministic gain at a point with objective gradient norm `grad_norm`.
    pub fn gain(&self, grad_norm: f64) -> f64 {
        if self.gain_reference.is_infinite() {
            1.0
        } else {
            self.gain_reference / self.gain_reference.hypot(grad_norm)
        }
    }

    pub fn with_estimator(mut self, estimator: EstimatorKind) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn from_config(cfg: &RigConfig) -> Result<Self> {
        let noise = NoiseModel {
            sigma_f0: cfg.sigma_f0,
            sigma_grad_f0: cfg.sigma_gradf0,
            eta: cfg.eta,
            exponent: cfg.distance_noise_exponent,
        };
        let mut rig = Self::new(cfg.range_c, noise, cfg.estimator, cfg.seed)?;
        if let Some(l) = cfg.reference_length {
            if !(l > 0.0) || !l.is_finite() {
                return Err(NavError::Config { field: "reference_length".into(), message: format!("must be positive, got {l}") });
            }
            rig.reference_length = l;
        }
        if let Some(g) = cfg.gain_reference {
            if !(g > 0.0) {
                return Err(NavError::Config { field: "gain_reference".into(), message: format!("must be positive, got {g}") });
            }
            rig.gain_reference = g;
        }
        if let Some(b) = cfg.bound {
            if !(b > 0.0) {
                return Err(NavError::Config { field: "bound".into(), message: format!("must be positive, got {b}") });
            }
            rig.bound = b;
        }
        Ok(rig)
    }
}

fn default_exponent() -> f64 {
    1.0
}

/// Serializable rig block of the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigConfig {
    pub range_c: f64,
    pub eta: f64,
    pub sigma_f0: f64,
    pub sigma_gradf0: f64,
    pub estimator: EstimatorKind,
    #[serde(default = "default_exponent")]
    pub distance_noise_exponent: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_reference: Option<f64>,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            range_c: 7.0,
            eta: 0.1,
            sigma_f0: 1.0,
            sigma_gradf0: 1.0,
            estimator: EstimatorKind::CircleFit,
            distance_noise_exponent: 1.0,
            seed: 0,
            reference_length: None,
            bound: None,
            gain_reference: None,
        }
    }
}

/// Substream identifiers, one per measured quantity.
pub(crate) mod quantity {
    pub const F0: u64 = 0;
    pub const GRAD_F0: u64 = 1;
    pub const DISTANCE: u64 = 2;
    pub const RADIUS: u64 = 3;
    pub const NORMAL: u64 = 4;
    pub const ELLIPSE_CENTER: u64 = 5;
    pub const ELLIPSE_SCALE: u64 = 6;
    pub const ELLIPSE_MATRIX: u64 = 7;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let cfg: RigConfig = serde_json::from_str(
            r#"{"range_c": 7, "eta": 0.1, "sigma_f0": 1, "sigma_gradf0": 1, "estimator": "circle_fit"}"#,
        )
        .unwrap();
        let rig = SensorRig::from_config(&cfg).unwrap();
        assert_eq!(rig.reference_length, 1.75);
        assert_eq!(rig.noise.exponent, 1.0);
        let bad = RigConfig { eta: -1.0, ..cfg };
        assert!(matches!(SensorRig::from_config(&bad), Err(NavError::Config { .. })));
    }

    #[test]
    fn distance_sigma_vanishes_on_boundary() {
        let n = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.5 };
        assert_eq!(n.distance_sigma(0.0), 0.0);
        assert!((n.distance_sigma(4.0) - 0.8).abs() < 1e-15);
    }
}
