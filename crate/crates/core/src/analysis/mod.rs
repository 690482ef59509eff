//! Bias diagnostics for the sensed gradient estimates.

mod bias;
mod decay;

pub use bias::{
    alpha, bias_report, closed_form, closed_form_bias, kappa, monte_carlo_bias, sample_estimates, scaled_bias,
    BiasReport, ClosedForm, MonteCarloBias,
};
pub use decay::{
    bracket_bound, discontinuity_sweep, fit_decay, saddle_bias_decay, saddle_quotient_check, scaled_bias_decay,
    track_saddles, DecayFit, Jump, QuotientRow, QuotientTable, SaddleTrack, DECAY_FLOOR, QUOTIENT_FLOOR,
};
