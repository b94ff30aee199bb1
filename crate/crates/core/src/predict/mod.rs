//! Prediction of synthesized-copy channel parameters as a function of the
//! number of averaged captures, and theoretical error rates.

mod ber;
mod fit;

pub use ber::{
    binomial_pmf, decoded_auth_ber, decoded_auth_ber_exact, prob_eps_a1_at_most, raw_auth_ber, raw_auth_ber_bit_exact,
    symbol_ber, symbol_bit_error_rate, DemodulationRule,
};
pub use fit::{
    fit_mean_power, fit_shape_avg, fit_variance_power, fit_variance_power_within, variance_residual, ConstellationFit,
    PredictionModel, DEFAULT_EXTRAPOLATION,
};
