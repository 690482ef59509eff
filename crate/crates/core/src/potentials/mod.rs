//! Artificial potentials, their exact gradients and critical-point tools.
//!
//! The Rimon-Koditschek potential is `φ_k = f₀ / (f₀^k + β)^{1/k}` and the
//! logarithmic barrier is `φ_k = f₀ − ln(β)/k`. Both are evaluated in log
//! space where needed so large orders do not overflow.

mod condition;
mod critical;

pub use condition::{check_condition, ConditionReport, ObstacleCondition};
pub use critical::{
    default_seeds, find_critical_points, find_order, locate_minimum, CriticalKind, CriticalPoint, CriticalReport,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::World;
use crate::numeric::log_add_exp;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    RimonKoditschek,
    LogBarrier,
}

/// Potential family and order parameter `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub k: f64,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(NavError::InvalidParameter(format!("order k = {k} must be positive")));
        }
        Ok(Self { kind, k })
    }

    pub fn rimon_koditschek(k: f64) -> Result<Self> {
        Self::new(PotentialKind::RimonKoditschek, k)
    }

    pub fn log_barrier(k: f64) -> Result<Self> {
        Self::new(PotentialKind::LogBarrier, k)
    }

    pub fn with_order(self, k: f64) -> Result<Self> {
        Self::new(self.kind, k)
    }
}

/// Interface shared by navigation-style potentials.
///
/// `descent_direction` must be a strictly positive multiple of `gradient`
/// on the free-space interior, with the multiplier given by `descent_scale`.
/// `critical_residual` is another positive multiple with moderate magnitude
/// that root finders work on.
pub trait Potential: Sync {
    fn value(&self, world: &World, x: &Point) -> Result<f64>;
    fn gradient(&self, world: &World, x: &Point) -> Result<DVector<f64>>;
    fn descent_direction(&self, world: &World, x: &Point) -> DVector<f64>;
    fn descent_scale(&self, world: &World, x: &Point) -> Result<f64>;
    fn critical_residual(&self, world: &World, x: &Point) -> Result<DVector<f64>>;
}

fn check_free(world: &World, x: &Point, allow_boundary: bool) -> Result<()> {
    let ok = x.iter().all(|v| v.is_finite())
        && world
            .factor_values(x)
            .iter()
            .all(|&b| if allow_boundary { b >= 0.0 } else { b > 0.0 });
    if ok {
        Ok(())
    } else {
        Err(NavError::OutsideFreeSpace)
    }
}

/// Some factor is smaller than the change a one-ulp perturbation of `x`
/// could cause, so its sign is not resolved.
fn on_boundary_to_rounding(world: &World, x: &Point) -> bool {
    let reach = 4.0 * f64::EPSILON * (x.norm() + 1.0);
    (0..world.factor_count()).any(|i| world.factor_value(i, x) <= reach * world.factor_gradient(i, x).norm())
}

/// `Σᵢ ∇βᵢ/βᵢ = ∇β/β` on the interior.
pub fn log_beta_gradient(world: &World, x: &Point) -> DVector<f64> {
    let mut s = DVector::zeros(x.len());
    for i in 0..world.factor_count() {
        s += world.factor_gradient(i, x) / world.factor_value(i, x);
    }
    s
}

impl PotentialSpec {
    /// `ln φ_k` of the Rimon-Koditschek potential without cancellation, so
    /// it keeps full relative precision where `φ_k` rounds to one.
    pub fn rk_log_value(&self, world: &World, x: &Point) -> Result<f64> {
        check_free(world, x, true)?;
        let lf = world.objective.value(x).ln();
        let lb = world.beta(x).ln();
        let kf = self.k * lf;
        Ok(if kf >= lb {
            -(lb - kf).exp().ln_1p() / self.k
        } else {
            lf - lb / self.k - (kf - lb).exp().ln_1p() / self.k
        })
    }

    /// `ln(f₀^k + β)` for the Rimon-Koditschek potential.
    fn log_denominator(&self, f0: f64, beta: f64) -> f64 {
        log_add_exp(self.k * f0.ln(), beta.ln())
    }
}

impl Potential for PotentialSpec {
    fn value(&self, world: &World, x: &Point) -> Result<f64> {
        let f0 = world.objective.value(x);
        match self.kind {
            PotentialKind::RimonKoditschek => {
                check_free(world, x, true)?;
                let beta = world.beta(x);
                if f0 == 0.0 {
                    return Ok(0.0);
                }
                if beta == 0.0 || on_boundary_to_rounding(world, x) {
                    return Ok(1.0);
                }
                Ok(self.rk_log_value(world, x)?.exp())
            }
            PotentialKind::LogBarrier => {
                check_free(world, x, false)?;
                let log_beta: f64 = world.factor_values(x).iter().map(|b| b.ln()).sum();
                Ok(f0 - log_beta / self.k)
            }
        }
    }

    fn gradient(&self, world: &World, x: &Point) -> Result<DVector<f64>> {
        check_free(world, x, false)?;
        let f0 = world.objective.value(x);
        let gf0 = world.objective.gradient(x);
        match self.kind {
            PotentialKind::RimonKoditschek => {
                let beta = world.beta(x);
                let gbeta = world.beta_gradient(x);
                let l = self.log_denominator(f0, beta);
                let p = 1.0 + 1.0 / self.k;
                let a = (beta.ln() - p * l).exp();
                let b = if f0 > 0.0 { (f0.ln() - p * l).exp() / self.k } else { 0.0 };
                Ok(gf0 * a - gbeta * b)
            }
            PotentialKind::LogBarrier => Ok(gf0 - log_beta_gradient(world, x) / self.k),
        }
    }

    fn descent_direction(&self, world: &World, x: &Point) -> DVector<f64> {
        let f0 = world.objective.value(x);
        let beta = world.beta(x);
        let gbeta = world.beta_gradient(x);
        let gf0 = world.objective.gradient(x) * beta;
        match self.kind {
            PotentialKind::RimonKoditschek => gf0 - gbeta * (f0 / self.k),
            PotentialKind::LogBarrier => gf0 - gbeta / self.k,
        }
    }

    fn descent_scale(&self, world: &World, x: &Point) -> Result<f64> {
        check_free(world, x, false)?;
        let beta = world.beta(x);
        match self.kind {
            PotentialKind::RimonKoditschek => {
                let f0 = world.objective.value(x);
                Ok(((1.0 + 1.0 / self.k) * self.log_denominator(f0, beta)).exp())
            }
            PotentialKind::LogBarrier => Ok(beta),
        }
    }

    fn critical_residual(&self, world: &World, x: &Point) -> Result<DVector<f64>> {
        check_free(world, x, false)?;
        let w = match self.kind {
            PotentialKind::RimonKoditschek => world.objective.value(x) / self.k,
            PotentialKind::LogBarrier => 1.0 / self.k,
        };
        Ok(world.objective.gradient(x) - log_beta_gradient(world, x) * w)
    }
}

/// Natural log of the Rimon-Koditschek descent scale `(f₀^k + β)^{1+1/k}`,
/// for callers that must stay in log space.
pub fn log_rk_scale(world: &World, k: f64, x: &Point) -> f64 {
    let f0 = world.objective.value(x);
    let beta = world.beta(x);
    (1.0 + 1.0 / k) * log_add_exp(k * f0.ln(), beta.ln())
}
