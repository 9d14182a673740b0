//! Threshold-agent market model.
//!
//! `num_agents` traders each hold a state of +-1 and a price interval
//! `[lower, upper]`. The log price diffuses; when it leaves an agent's
//! interval the agent switches state and re-brackets the new price, and the
//! resulting sentiment change feeds back into the next price update through
//! the coupling `kappa`. Herding drifts the thresholds of minority agents
//! inward at rate `C_i * h * |sigma|`, the ingredient that fattens the
//! return tails; small Gaussian threshold noise keeps the population from
//! freezing.
//!
//! All randomness is drawn from three named streams (price, threshold
//! noise, resets) derived from one seed, so runs are bitwise reproducible
//! and the price stream can be replayed in isolation.

mod agent;
mod params;
mod sim;

pub use agent::{detect_and_switch, drift_thresholds, Agent};
pub use params::{MarketParams, NoiseScale, VolatilityFn};
pub use sim::{
    price_step, run, sentiment, threshold_density, DayRecord, MarketSim, MarketState,
    ReturnSeries, RunOutput, Side,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MarketError {
    #[error("market parameters rejected: {reason}")]
    BadParams { reason: &'static str },
    #[error("market state rejected: {reason}")]
    BadState { reason: &'static str },
    #[error("agent population must be nonempty with positive total weight")]
    EmptyAgents,
    #[error("price must be positive and finite, got {value}")]
    BadPrice { value: f64 },
}
