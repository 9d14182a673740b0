//! Closed-form and semi-analytic busy-period results.
//!
//! Everything here is deterministic arithmetic: the M/M/1 busy-period
//! density, the Takacs fixed point for general service, moment formulas,
//! and the heavy-tail relation. The Monte Carlo counterparts live in
//! [`crate::queue`]; the two layers cross-validate each other.

mod bessel;
mod busy;
mod quad;
mod takacs;
mod tail;

pub use bessel::{bessel_i1, bessel_i1_scaled};
pub use busy::{
    busy_cdf_mm1, busy_density_mm1, busy_moment4, busy_moment_mm1, upper_cutoff_mm1,
    ServiceMoments,
};
pub use quad::adaptive_simpson;
pub use takacs::{
    busy_mean_from_lst, busy_moment4_from_lst, derivative1_central, derivative4_central,
    mm1_busy_lst, takacs_lst,
};
pub use tail::{tail_prediction, TailSpec};

use thiserror::Error;

/// Failure modes of the analytic layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    /// Rates and service scales must be positive and finite.
    #[error("rate {value} is not a positive finite number")]
    BadRate { value: f64 },
    /// Busy periods are finite only for utilization below 1.
    #[error("utilization {rho} is outside [0, 1)")]
    Utilization { rho: f64 },
    /// Time arguments must sit in the distribution's support.
    #[error("time {value} is outside the valid range")]
    BadTime { value: f64 },
    /// Takacs iteration stalled or blew up.
    #[error(
        "fixed point failed after {iterations} iterations \
         (last step {last_step:e}, value {value})"
    )]
    NoConvergence {
        iterations: u32,
        last_step: f64,
        value: f64,
    },
    /// A transform was evaluated outside its convergence strip.
    #[error("transform not evaluable at s = {s}")]
    OutsideDomain { s: f64 },
    /// Service moment sequence failed validation.
    #[error("service moments rejected: {reason}")]
    BadMoments { reason: &'static str },
    /// Tail specification failed validation.
    #[error("tail spec rejected: {reason}")]
    BadTailSpec { reason: &'static str },
}
