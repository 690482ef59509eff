//! Stochastic navigation with artificial potentials.
//!
//! An agent descends a Rimon-Koditschek (or logarithmic barrier) potential
//! built from a convex objective and the product of obstacle functions, using
//! only noisy local measurements of nearby obstacles. The crate provides the
//! ground-truth geometry, the exact potentials, sensor models and gradient
//! estimators, the stochastic update loop, bias diagnostics and world
//! generators for Monte Carlo campaigns.

pub mod analysis;
pub mod cli;
pub mod descent;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod numeric;
pub mod potentials;
pub mod sensors;

pub use error::{NavError, Result};

/// Points and vectors in `ℝⁿ`.
pub type Point = nalgebra::DVector<f64>;
