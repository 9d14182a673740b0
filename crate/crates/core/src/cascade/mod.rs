//! Instantaneous price cascades and their queueing counterpart.
//!
//! A falling price sweeping through waiting sell thresholds is, after
//! swapping price for time, a busy period: each switch is a customer
//! whose service time is its price impact, and buy-side thresholds act
//! like reneging work. [`cascade_to_queue`] makes the dictionary
//! explicit; the Monte Carlo tests hold both sides to it.

mod engine;
mod field;

pub use engine::{
    run_cascade, sample_cascades, AgentId, CascadeOutcome, CascadeSample, Switch,
};
pub use field::{FieldEntry, FieldGenerator, ThresholdField, WeightDist};

use thiserror::Error;

use crate::queue::{QueueParams, RateFn, ServiceDist};

/// Cascade configuration and mapping failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error("threshold field rejected: {reason}")]
    BadField { reason: &'static str },
    #[error("no queue equivalent: {reason}")]
    UnsupportedMapping { reason: &'static str },
    #[error("n_samples must be at least 1")]
    NoSamples,
}

/// Queue whose busy period corresponds to the field's cascade drops:
/// price maps to time, same-state thresholds arrive at λ_c·(1 − anti
/// fraction) with service 2κ·weight/W, and anti thresholds become a
/// reneging intensity λ_c·(anti fraction).
///
/// The reneging variants differ in detail: the queue abandons whole
/// waiting customers at the given rate, while cascade antis cancel an
/// equal amount of committed work. The correspondence is exact only with
/// no antis.
pub fn cascade_to_queue(field: &ThresholdField) -> Result<QueueParams, CascadeError> {
    field.validate()?;
    let g = field.generator.as_ref().ok_or(CascadeError::UnsupportedMapping {
        reason: "explicit threshold lists are one realization, not a distribution; \
                 a Poisson generator is required",
    })?;
    let scale = field.jump_scale();
    let service = match g.weight_dist {
        WeightDist::Constant { w } => ServiceDist::Deterministic { d: scale * w },
        WeightDist::Exponential { mean } => ServiceDist::Exponential {
            mu: 1.0 / (scale * mean),
        },
    };
    Ok(QueueParams {
        arrival: RateFn::Constant(g.poisson_rate * (1.0 - g.anti_fraction)),
        service,
        reneging: (g.anti_fraction > 0.0)
            .then(|| RateFn::Constant(g.poisson_rate * g.anti_fraction)),
    })
}
