//! Threshold-agent market simulation and queueing analysis of price cascades.
//!
//! The crate has two halves that meet in the middle:
//!
//! * **Long timescales**: [`market`] simulates `M` slow investors whose
//!   buy/sell decisions are triggered when the price leaves a personal
//!   threshold interval. Their aggregate sentiment feeds back into an
//!   otherwise geometric-Brownian price, producing fat-tailed daily returns
//!   and (with sentiment-coupled volatility) volatility clustering.
//! * **Short timescales**: [`cascade`] models a single instantaneous chain
//!   of threshold-triggered trades, and [`queue`] / [`analytics`] provide the
//!   single-server-queue machinery it maps onto: the total log-price move of
//!   a cascade is distributed like the busy period of an `M/G/1` queue.
//!
//! [`stats`] holds the measurement side: excess kurtosis, Hill tail-exponent
//! estimation, autocorrelation with noise bands, and histogram/CDF utilities
//! shared by the tests and the command-line front end.

pub mod analytics;
pub mod cascade;
pub mod csvio;
pub mod market;
pub mod queue;
pub mod rng;
pub mod stats;
