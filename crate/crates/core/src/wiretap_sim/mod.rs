//! Finite-alphabet wiretap channels with random codebooks.
//!
//! All distributions over output sequences are enumerated exactly (up to
//! [`DEFAULT_STATE_BUDGET`] states), with the first symbol as the most
//! significant digit of the sequence index. Samplers are provided for the
//! quantities that remain meaningful past that budget.

mod channel;
mod codebook;
mod decoder;
mod experiment;
mod measures;
mod security;

pub use channel::{check_distribution, DiscreteChannel, DiscreteWiretapSystem, DISTRIBUTION_TOLERANCE, ROW_TOLERANCE};
pub use codebook::{
    codebook_size, iid_distribution, message_output_distribution, message_output_distribution_with_budget,
    random_codebook, word_output_distribution, Codebook, DEFAULT_STATE_BUDGET,
};
pub use decoder::{
    average_errors, average_errors_mc, default_decoder_eps, typicality_decode, ErrorEstimate, TypicalityDecoder,
    DEFAULT_EPS_FRACTION,
};
pub use experiment::{
    least_squares_slope, run_decay, security_decay_experiment, DecayResult, DecayRow, DecaySpec, DecaySummary,
    RegimeFlags,
};
pub use measures::{
    atypical_probability, information_density, joint_and_product, mutual_information, output_marginal,
    renyi_divergence, tv_distance, tv_positive_part, Density, DENSITY_TIE_TOLERANCE,
};
pub use security::{
    distinguishing_advantage, distinguishing_advantage_mc, exponent_predictions, mcdiarmid_rhs, message_tv_to_product,
    security_report, semantic_advantage_interval, Estimate, ExponentPredictions, SecurityReport,
};
