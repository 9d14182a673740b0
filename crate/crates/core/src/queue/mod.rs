//! Single-server queue simulation for busy-period sampling.
//!
//! This is the Monte Carlo side of the busy-period story: the analytic
//! formulas live in [`crate::analytics`], and cascades map onto these
//! queues through [`crate::cascade`].

mod des;
mod params;

pub use des::{sample_busy_periods, BusyPeriodSample};
pub use params::{QueueParams, RateFn, ServiceDist};

use thiserror::Error;

/// Configuration and sampling failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueueError {
    #[error("queue configuration rejected: {reason}")]
    BadConfig { reason: &'static str },
    /// Busy periods are almost surely finite only for ρ < 1; unstable
    /// queues can still be sampled with a duration cap.
    #[error("utilization {rho} is not below 1; set max_duration to sample with truncation")]
    UnstableWithoutCap { rho: f64 },
    #[error("n_samples must be at least 1")]
    NoSamples,
}
