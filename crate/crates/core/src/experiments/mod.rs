//! World generators and Monte Carlo campaigns.

mod campaign;
mod generate;
mod stats;

pub use campaign::{
    aggregate, campaign_starts, deviation_sweep, run_campaign, run_seed, CampaignAggregates, CampaignConfig,
    CampaignResult, ClearanceSummary, DeviationRow, RunRow,
};
pub use generate::{generate_egg_world, generate_elliptical_world, EggWorldParams, EllipticalWorldParams, MAX_REJECTIONS};
pub use stats::{binomial_upper_tail, median, paired_sign_test, SignTest};
