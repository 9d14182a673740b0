//! Queue configuration: arrival/reneging rate functions and service
//! distributions.

use rand::Rng;
use rand_distr::{Distribution, Exp, Pareto};
use serde::{Deserialize, Serialize};

use super::QueueError;
use crate::analytics::ServiceMoments;

/// Nonnegative rate, either fixed or piecewise constant in time or in the
/// number of customers present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateFn {
    Constant(f64),
    /// (start_time, rate) pairs; the first start must be 0 and starts must
    /// be strictly increasing. The last rate holds forever.
    TimeSteps { time_steps: Vec<(f64, f64)> },
    /// Entry q is the rate with q customers in the system; the last entry
    /// holds for all larger q.
    QueueSteps { queue_steps: Vec<f64> },
}

impl RateFn {
    pub fn rate_at(&self, t: f64, in_system: usize) -> f64 {
        match self {
            Self::Constant(r) => *r,
            Self::TimeSteps { time_steps } => {
                let mut rate = time_steps[0].1;
                for &(start, r) in time_steps {
                    if start <= t {
                        rate = r;
                    } else {
                        break;
                    }
                }
                rate
            }
            Self::QueueSteps { queue_steps } => {
                queue_steps[in_system.min(queue_steps.len() - 1)]
            }
        }
    }

    /// First time strictly after `t` at which the rate may change.
    pub fn next_change_after(&self, t: f64) -> Option<f64> {
        match self {
            Self::TimeSteps { time_steps } => {
                time_steps.iter().map(|&(start, _)| start).find(|&s| s > t)
            }
            _ => None,
        }
    }

    /// Largest rate the function can ever return.
    pub fn max_rate(&self) -> f64 {
        match self {
            Self::Constant(r) => *r,
            Self::TimeSteps { time_steps } => {
                time_steps.iter().map(|&(_, r)| r).fold(0.0, f64::max)
            }
            Self::QueueSteps { queue_steps } => queue_steps.iter().copied().fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<(), QueueError> {
        let rates: Vec<f64> = match self {
            Self::Constant(r) => vec![*r],
            Self::TimeSteps { time_steps } => {
                if time_steps.is_empty() {
                    return Err(QueueError::BadConfig {
                        reason: "time_steps must be nonempty",
                    });
                }
                if time_steps[0].0 != 0.0 {
                    return Err(QueueError::BadConfig {
                        reason: "time_steps must start at time 0",
                    });
                }
                if time_steps.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(QueueError::BadConfig {
                        reason: "time_steps times must be strictly increasing",
                    });
                }
                time_steps.iter().map(|&(_, r)| r).collect()
            }
            Self::QueueSteps { queue_steps } => {
                if queue_steps.is_empty() {
                    return Err(QueueError::BadConfig {
                        reason: "queue_steps must be nonempty",
                    });
                }
                queue_steps.clone()
            }
        };
        if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(QueueError::BadConfig {
                reason: "rates must be nonnegative and finite",
            });
        }
        Ok(())
    }
}

/// Service-time distribution Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceDist {
    Exponential { mu: f64 },
    Deterministic { d: f64 },
    Pareto { alpha: f64, x_min: f64 },
    Empirical { samples: Vec<f64> },
}

impl ServiceDist {
    pub fn validate(&self) -> Result<(), QueueError> {
        let ok = match self {
            Self::Exponential { mu } => *mu > 0.0 && mu.is_finite(),
            Self::Deterministic { d } => *d > 0.0 && d.is_finite(),
            Self::Pareto { alpha, x_min } => {
                *alpha > 0.0 && alpha.is_finite() && *x_min > 0.0 && x_min.is_finite()
            }
            Self::Empirical { samples } => {
                !samples.is_empty() && samples.iter().all(|y| *y > 0.0 && y.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(QueueError::BadConfig {
                reason: "service distribution parameters are out of range",
            })
        }
    }

    /// E[Y]; `None` when infinite (Pareto with α ≤ 1).
    pub fn mean(&self) -> Option<f64> {
        match self {
            Self::Exponential { mu } => Some(1.0 / mu),
            Self::Deterministic { d } => Some(*d),
            Self::Pareto { alpha, x_min } => {
                (*alpha > 1.0).then(|| alpha * x_min / (alpha - 1.0))
            }
            Self::Empirical { samples } => {
                Some(samples.iter().sum::<f64>() / samples.len() as f64)
            }
        }
    }

    /// First four raw moments; `None` when any is infinite or invalid.
    pub fn moments4(&self) -> Option<ServiceMoments> {
        match self {
            Self::Exponential { mu } => ServiceMoments::exponential(*mu).ok(),
            Self::Deterministic { d } => ServiceMoments::deterministic(*d).ok(),
            Self::Pareto { alpha, x_min } => {
                if *alpha <= 4.0 {
                    return None;
                }
                let m = |k: i32| alpha * x_min.powi(k) / (alpha - k as f64);
                ServiceMoments::new(m(1), m(2), m(3), m(4)).ok()
            }
            Self::Empirical { samples } => {
                let n = samples.len() as f64;
                let m = |k: i32| samples.iter().map(|y| y.powi(k)).sum::<f64>() / n;
                ServiceMoments::new(m(1), m(2), m(3), m(4)).ok()
            }
        }
    }

    /// Laplace-Stieltjes transform E[e^{−sY}] where it has a closed or
    /// finite form; `None` for Pareto.
    pub fn lst(&self, s: f64) -> Option<f64> {
        match self {
            Self::Exponential { mu } => Some(mu / (mu + s)),
            Self::Deterministic { d } => Some((-d * s).exp()),
            Self::Pareto { .. } => None,
            Self::Empirical { samples } => {
                Some(samples.iter().map(|y| (-s * y).exp()).sum::<f64>() / samples.len() as f64)
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { mu } => Exp::new(*mu).expect("validated").sample(rng),
            Self::Deterministic { d } => *d,
            Self::Pareto { alpha, x_min } => {
                Pareto::new(*x_min, *alpha).expect("validated").sample(rng)
            }
            Self::Empirical { samples } => samples[rng.gen_range(0..samples.len())],
        }
    }
}

/// Single-server queue specification.
///
/// `reneging = None` is the classical M/G/1; otherwise every waiting
/// customer abandons independently at the given rate (the customer in
/// service never abandons).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QueueParams {
    pub arrival: RateFn,
    pub service: ServiceDist,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reneging: Option<RateFn>,
}

/// The reference half-loaded M/M/1.
impl Default for QueueParams {
    fn default() -> Self {
        Self {
            arrival: RateFn::Constant(0.5),
            service: ServiceDist::Exponential { mu: 1.0 },
            reneging: None,
        }
    }
}

impl QueueParams {
    pub fn validate(&self) -> Result<(), QueueError> {
        self.arrival.validate()?;
        if self.arrival.max_rate() <= 0.0 {
            return Err(QueueError::BadConfig {
                reason: "arrival rate function is never positive",
            });
        }
        self.service.validate()?;
        if let Some(r) = &self.reneging {
            r.validate()?;
        }
        Ok(())
    }

    /// ρ = λ·E[Y] using the largest arrival rate; `None` when E[Y] = ∞.
    ///
    /// For state-dependent arrivals this is an upper bound, so stability
    /// rejection is conservative.
    pub fn utilization(&self) -> Option<f64> {
        self.service.mean().map(|m| self.arrival.max_rate() * m)
    }
}
