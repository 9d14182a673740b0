//! Threshold agents and their per-step transitions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::params::MarketParams;

/// One threshold trader. The interval `[lower, upper]` brackets the price
/// between switches; heavy drift can invert it, which the detection pass
/// treats as an immediate crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    /// +1 or -1.
    pub state: i8,
    pub lower: f64,
    pub upper: f64,
    pub weight: f64,
    /// Herding coefficient `C_i`.
    pub herding_coeff: f64,
}

/// Uniform draw from a closed range; degenerate ranges return the endpoint.
pub(super) fn uniform_in<R: Rng>((lo, hi): (f64, f64), rng: &mut R) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Drifts one agent's thresholds for a step taken at the given sentiment.
///
/// An agent in the minority (state opposing the sentiment sign) moves both
/// thresholds inward by `C_i * h * |sigma|`; every agent also picks up
/// independent Gaussian noise on each side. Consumes exactly two draws from
/// `rng` (lower side first) whenever the noise level is positive, and none
/// otherwise.
pub fn drift_thresholds<R: Rng>(
    agent: &mut Agent,
    sentiment: f64,
    params: &MarketParams,
    rng: &mut R,
) {
    let shift = if f64::from(agent.state) * sentiment < 0.0 {
        agent.herding_coeff * params.timestep * sentiment.abs()
    } else {
        0.0
    };
    let std = params.noise_std();
    let (noise_lower, noise_upper) = if std > 0.0 {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        (std * a, std * b)
    } else {
        (0.0, 0.0)
    };
    agent.lower += shift + noise_lower;
    agent.upper += noise_upper - shift;
}

/// Switches the agent if the price lies outside the open interval
/// `(lower, upper)`, flipping its state exactly once and re-bracketing the
/// price with fresh offsets `Z_L, Z_U`. Consumes two draws from `rng` on a
/// switch (lower offset first) and none otherwise. Returns whether a switch
/// happened.
pub fn detect_and_switch<R: Rng>(
    agent: &mut Agent,
    price: f64,
    params: &MarketParams,
    rng: &mut R,
) -> bool {
    if agent.lower < price && price < agent.upper {
        return false;
    }
    agent.state = -agent.state;
    let z_low = uniform_in(params.reset_low_range, rng);
    let z_high = uniform_in(params.reset_high_range, rng);
    agent.lower = price / (1.0 + z_low);
    agent.upper = price * (1.0 + z_high);
    true
}
