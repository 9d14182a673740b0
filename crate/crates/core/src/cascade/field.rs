//! Threshold fields: the static landscape a cascade sweeps through.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::CascadeError;

/// One waiting threshold below the cascade start.
///
/// `position` is the log-price offset below the starting price, so larger
/// values sit deeper. `state` is +1 for agents that sell into a falling
/// price (feeding the cascade) and −1 for agents that buy against it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldEntry {
    pub position: f64,
    pub state: i8,
    pub weight: f64,
}

/// Distribution of agent weights for generated fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightDist {
    Constant { w: f64 },
    Exponential { mean: f64 },
}

impl WeightDist {
    pub fn mean(&self) -> f64 {
        match self {
            Self::Constant { w } => *w,
            Self::Exponential { mean } => *mean,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Constant { w } => *w,
            Self::Exponential { mean } => {
                Exp::new(1.0 / mean).expect("validated").sample(rng)
            }
        }
    }

    fn validate(&self) -> Result<(), CascadeError> {
        let v = self.mean();
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(CascadeError::BadField {
                reason: "weight distribution must have a positive finite scale",
            })
        }
    }
}

/// Stochastic field specification: threshold positions form a Poisson
/// process of rate `poisson_rate` per unit log-price; each threshold is
/// anti (−1) with probability `anti_fraction` and carries a weight drawn
/// from `weight_dist`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGenerator {
    pub poisson_rate: f64,
    pub weight_dist: WeightDist,
    pub anti_fraction: f64,
}

/// Threshold landscape: explicit entries, a generator, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdField {
    /// Explicit thresholds, sorted ascending by position. Ties are
    /// processed in list order.
    #[serde(default)]
    pub entries: Vec<FieldEntry>,
    /// Coupling κ; a switch of weight w moves the price by 2κw/W.
    pub coupling: f64,
    /// Normalizing total weight W.
    pub total_weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<FieldGenerator>,
}

impl ThresholdField {
    pub fn validate(&self) -> Result<(), CascadeError> {
        for v in [self.coupling, self.total_weight] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CascadeError::BadField {
                    reason: "coupling and total weight must be positive and finite",
                });
            }
        }
        if self.entries.is_empty() && self.generator.is_none() {
            return Err(CascadeError::BadField {
                reason: "field needs explicit entries or a generator",
            });
        }
        let mut prev = 0.0f64;
        for e in &self.entries {
            if !(e.position >= 0.0 && e.position.is_finite()) {
                return Err(CascadeError::BadField {
                    reason: "positions must be nonnegative and finite",
                });
            }
            if e.position < prev {
                return Err(CascadeError::BadField {
                    reason: "positions must be sorted ascending",
                });
            }
            prev = e.position;
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(CascadeError::BadField {
                    reason: "weights must be positive and finite",
                });
            }
            if e.state != 1 && e.state != -1 {
                return Err(CascadeError::BadField {
                    reason: "states must be +1 or -1",
                });
            }
        }
        if let Some(g) = &self.generator {
            if !(g.poisson_rate > 0.0 && g.poisson_rate.is_finite()) {
                return Err(CascadeError::BadField {
                    reason: "poisson_rate must be positive and finite",
                });
            }
            if !(0.0..1.0).contains(&g.anti_fraction) {
                return Err(CascadeError::BadField {
                    reason: "anti_fraction must lie in [0, 1)",
                });
            }
            g.weight_dist.validate()?;
        }
        Ok(())
    }

    /// Log-price move per unit weight, 2κ/W.
    pub fn jump_scale(&self) -> f64 {
        2.0 * self.coupling / self.total_weight
    }
}
