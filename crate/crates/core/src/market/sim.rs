//! Synchronous market stepping and daily aggregation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::agent::{detect_and_switch, drift_thresholds, uniform_in, Agent};
use super::params::MarketParams;
use super::MarketError;
use crate::rng::{stream_rng, STREAM_PRICE, STREAM_RESETS, STREAM_THRESHOLDS};
use crate::stats::{Histogram, HistogramSpec};

/// Weighted mean state, clamped against rounding just outside `[-1, 1]`.
pub fn sentiment(agents: &[Agent], total_weight: f64) -> Result<f64, MarketError> {
    if agents.is_empty() || !(total_weight > 0.0 && total_weight.is_finite()) {
        return Err(MarketError::EmptyAgents);
    }
    let sum: f64 = agents.iter().map(|a| f64::from(a.state) * a.weight).sum();
    Ok((sum / total_weight).clamp(-1.0, 1.0))
}

/// One multiplicative price update.
///
/// The exponent combines the Wiener term `sqrt(h) * eta * f(sigma)`, the Ito
/// correction `-h/2`, and the sentiment kick `kappa * sigma_change` carrying
/// the previous step's switches.
pub fn price_step(
    price: f64,
    sentiment: f64,
    sigma_change: f64,
    eta: f64,
    params: &MarketParams,
) -> Result<f64, MarketError> {
    if !(price > 0.0 && price.is_finite()) {
        return Err(MarketError::BadPrice { value: price });
    }
    let f = params.volatility_fn.eval(sentiment);
    let exponent = params.timestep.sqrt() * eta * f - params.timestep / 2.0
        + params.coupling * sigma_change;
    Ok(price * exponent.exp())
}

/// Full simulation state between steps.
///
/// `sentiment - prev_sentiment` is the kick the next price update receives;
/// `sentiment` stays within 1e-12 of the weighted mean of the states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub price: f64,
    pub sentiment: f64,
    pub prev_sentiment: f64,
    pub agents: Vec<Agent>,
    pub total_weight: f64,
    pub step_index: u64,
}

/// Steps between from-scratch sentiment rebuilds; bounds the incremental
/// accumulation error well under the 1e-12 consistency budget.
const REBUILD_INTERVAL: u32 = 1024;

/// Stepper owning the state and the three named noise streams.
pub struct MarketSim {
    params: MarketParams,
    state: MarketState,
    rng_price: ChaCha8Rng,
    rng_thresholds: ChaCha8Rng,
    rng_resets: ChaCha8Rng,
    steps_since_rebuild: u32,
}

impl MarketSim {
    /// Builds the initial population at price 1: states are symmetric coin
    /// flips, herding coefficients are uniform on `herding_range`, weights
    /// are 1, and thresholds come from the reset rule around the price. All
    /// initialization draws consume the resets stream (per agent: state,
    /// `Z_L`, `Z_U`, `C_i`), leaving the price stream untouched until the
    /// first step.
    pub fn new(params: MarketParams) -> Result<Self, MarketError> {
        params.validate()?;
        let mut rng_resets = stream_rng(params.rng_seed, STREAM_RESETS);
        let price = 1.0;
        let agents: Vec<Agent> = (0..params.num_agents)
            .map(|_| {
                let state = if rng_resets.gen::<bool>() { 1 } else { -1 };
                let z_low = uniform_in(params.reset_low_range, &mut rng_resets);
                let z_high = uniform_in(params.reset_high_range, &mut rng_resets);
                let herding_coeff = uniform_in(params.herding_range, &mut rng_resets);
                Agent {
                    state,
                    lower: price / (1.0 + z_low),
                    upper: price * (1.0 + z_high),
                    weight: 1.0,
                    herding_coeff,
                }
            })
            .collect();
        let total_weight = agents.iter().map(|a| a.weight).sum();
        let s0 = sentiment(&agents, total_weight)?;
        let state = MarketState {
            price,
            sentiment: s0,
            prev_sentiment: s0,
            agents,
            total_weight,
            step_index: 0,
        };
        Ok(Self {
            rng_price: stream_rng(params.rng_seed, STREAM_PRICE),
            rng_thresholds: stream_rng(params.rng_seed, STREAM_THRESHOLDS),
            rng_resets,
            params,
            state,
            steps_since_rebuild: 0,
        })
    }

    /// Adopts an externally built state. The noise streams restart from the
    /// seed in `params`, so this is for constructing scenarios, not for
    /// splitting one run into two.
    pub fn with_state(params: MarketParams, state: MarketState) -> Result<Self, MarketError> {
        params.validate()?;
        let bad = |reason| Err(MarketError::BadState { reason });
        if state.agents.len() != params.num_agents {
            return bad("num_agents must match the agent vector");
        }
        if !(state.price > 0.0 && state.price.is_finite()) {
            return bad("price must be positive and finite");
        }
        for a in &state.agents {
            if a.state != 1 && a.state != -1 {
                return bad("agent states must be +1 or -1");
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return bad("agent weights must be positive and finite");
            }
            if !(a.lower.is_finite() && a.upper.is_finite()) {
                return bad("thresholds must be finite");
            }
            if !(a.herding_coeff >= 0.0 && a.herding_coeff.is_finite()) {
                return bad("herding coefficients must be nonnegative and finite");
            }
        }
        let weight_sum: f64 = state.agents.iter().map(|a| a.weight).sum();
        if (state.total_weight - weight_sum).abs() > 1e-9 * weight_sum.max(1.0) {
            return bad("total_weight must equal the sum of agent weights");
        }
        let scratch = sentiment(&state.agents, state.total_weight)?;
        if (state.sentiment - scratch).abs() > 1e-12 {
            return bad("sentiment must match the weighted mean of states");
        }
        if !(state.prev_sentiment.abs() <= 1.0) {
            return bad("prev_sentiment must lie in [-1, 1]");
        }
        Ok(Self {
            rng_price: stream_rng(params.rng_seed, STREAM_PRICE),
            rng_thresholds: stream_rng(params.rng_seed, STREAM_THRESHOLDS),
            rng_resets: stream_rng(params.rng_seed, STREAM_RESETS),
            params,
            state,
            steps_since_rebuild: 0,
        })
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn state(&self) -> &MarketState {
        &self.state
    }

    pub fn into_state(self) -> MarketState {
        self.state
    }

    /// Advances one substep; returns the number of switches.
    ///
    /// Order within the step: the price moves first, kicked by the previous
    /// step's sentiment change; thresholds then drift at the pre-switch
    /// sentiment; finally every agent is checked against the new price
    /// simultaneously. A switch therefore affects prices and sentiment only
    /// from the following step on.
    pub fn step(&mut self) -> u64 {
        let sigma = self.state.sentiment;
        let sigma_change = sigma - self.state.prev_sentiment;
        let eta: f64 = self.rng_price.sample(StandardNormal);
        let price = price_step(self.state.price, sigma, sigma_change, eta, &self.params)
            .expect("exponential update keeps the price positive");

        for agent in &mut self.state.agents {
            drift_thresholds(agent, sigma, &self.params, &mut self.rng_thresholds);
        }

        let mut switches = 0u64;
        let mut shift = 0.0;
        for agent in &mut self.state.agents {
            if detect_and_switch(agent, price, &self.params, &mut self.rng_resets) {
                switches += 1;
                shift += 2.0 * f64::from(agent.state) * agent.weight;
            }
        }

        self.steps_since_rebuild += 1;
        let next_sigma = if self.steps_since_rebuild >= REBUILD_INTERVAL {
            self.steps_since_rebuild = 0;
            sentiment(&self.state.agents, self.state.total_weight)
                .expect("population stays valid")
        } else {
            (sigma + shift / self.state.total_weight).clamp(-1.0, 1.0)
        };

        self.state.prev_sentiment = sigma;
        self.state.sentiment = next_sigma;
        self.state.price = price;
        self.state.step_index += 1;
        switches
    }

    /// Advances `days` full trading days, one record per day. Day numbering
    /// continues from the steps already taken.
    pub fn run_days(&mut self, days: usize) -> Vec<DayRecord> {
        let substeps = self.params.substeps_per_day;
        let day0 = self.state.step_index / u64::from(substeps);
        let mut out = Vec::with_capacity(days);
        let mut prev_close = self.state.price;
        for k in 1..=days as u64 {
            let mut num_switches = 0;
            for _ in 0..substeps {
                num_switches += self.step();
            }
            let price = self.state.price;
            out.push(DayRecord {
                day: day0 + k,
                price,
                log_return: (price / prev_close).ln(),
                sentiment: self.state.sentiment,
                num_switches,
            });
            prev_close = price;
        }
        out
    }
}

/// One day's closing record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u64,
    pub price: f64,
    pub log_return: f64,
    pub sentiment: f64,
    pub num_switches: u64,
}

/// Daily log returns plus the substep resolution they were aggregated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub daily_log_returns: Vec<f64>,
    pub substeps_per_day: u32,
}

/// A complete run: daily records and the state it ended in.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub days: Vec<DayRecord>,
    pub substeps_per_day: u32,
    pub final_state: MarketState,
}

impl RunOutput {
    pub fn returns(&self) -> ReturnSeries {
        ReturnSeries {
            daily_log_returns: self.days.iter().map(|d| d.log_return).collect(),
            substeps_per_day: self.substeps_per_day,
        }
    }
}

/// Runs a fresh simulation for `total_days` trading days.
pub fn run(params: &MarketParams, total_days: usize) -> Result<RunOutput, MarketError> {
    let mut sim = MarketSim::new(params.clone())?;
    let days = sim.run_days(total_days);
    Ok(RunOutput {
        days,
        substeps_per_day: params.substeps_per_day,
        final_state: sim.into_state(),
    })
}

/// Threshold side selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

/// Histograms of one threshold side, labeled by agent state.
///
/// With `by_state` the result pairs label `1` with the `+1` population and
/// `-1` with the rest; otherwise a single combined histogram under label
/// `0`. Counts across the returned histograms always sum to the number of
/// agents, out-of-range values landing in the edge bins.
pub fn threshold_density(
    state: &MarketState,
    side: Side,
    by_state: bool,
    spec: HistogramSpec,
) -> Vec<(i8, Histogram)> {
    let pick = |a: &Agent| match side {
        Side::Lower => a.lower,
        Side::Upper => a.upper,
    };
    if by_state {
        [1i8, -1]
            .into_iter()
            .map(|s| {
                let hist = Histogram::from_samples(
                    spec,
                    state.agents.iter().filter(|a| a.state == s).map(pick),
                );
                (s, hist)
            })
            .collect()
    } else {
        vec![(0, Histogram::from_samples(spec, state.agents.iter().map(pick)))]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::VolatilityFn;
    use crate::rng::stream_rng;
    use crate::stats::{chi_square_two_sample, excess_kurtosis};

    fn tiny_agent(state: i8, lower: f64, upper: f64, weight: f64) -> Agent {
        Agent {
            state,
            lower,
            upper,
            weight,
            herding_coeff: 0.0,
        }
    }

    fn hand_state(agents: Vec<Agent>, price: f64) -> MarketState {
        let total_weight = agents.iter().map(|a| a.weight).sum();
        let s = sentiment(&agents, total_weight).unwrap();
        MarketState {
            price,
            sentiment: s,
            prev_sentiment: s,
            agents,
            total_weight,
            step_index: 0,
        }
    }

    #[test]
    fn sentiment_examples() {
        let unanimous = vec![tiny_agent(1, 0.9, 1.1, 1.0); 4];
        assert_eq!(sentiment(&unanimous, 4.0).unwrap(), 1.0);

        let balanced = vec![tiny_agent(1, 0.9, 1.1, 1.0), tiny_agent(-1, 0.9, 1.1, 1.0)];
        assert_eq!(sentiment(&balanced, 2.0).unwrap(), 0.0);

        let weighted = vec![tiny_agent(1, 0.9, 1.1, 1.0), tiny_agent(-1, 0.9, 1.1, 3.0)];
        assert_eq!(sentiment(&weighted, 4.0).unwrap(), -0.5);

        assert_eq!(sentiment(&[], 1.0), Err(MarketError::EmptyAgents));
        assert_eq!(sentiment(&weighted, 0.0), Err(MarketError::EmptyAgents));
    }

    #[test]
    fn price_step_examples() {
        let drift_only = MarketParams {
            coupling: 0.0,
            volatility_fn: VolatilityFn::ConstantOne,
            ..MarketParams::default()
        };
        // No noise, no coupling: pure Ito drift over one step of h = 4e-6.
        let p = price_step(2.0, 0.3, 0.5, 0.0, &drift_only).unwrap();
        assert_eq!(p, 2.0 * (-2e-6f64).exp());

        let coupled = MarketParams {
            volatility_fn: VolatilityFn::ConstantOne,
            ..MarketParams::default()
        };
        let p = price_step(1.0, 0.0, 0.02, 0.0, &coupled).unwrap();
        let expected = (0.1 * 0.02 - 2e-6f64).exp();
        assert!((p / expected - 1.0).abs() < 1e-14, "{p} vs {expected}");

        assert!(matches!(
            price_step(0.0, 0.0, 0.0, 0.0, &coupled),
            Err(MarketError::BadPrice { .. })
        ));
        assert!(matches!(
            price_step(f64::INFINITY, 0.0, 0.0, 0.0, &coupled),
            Err(MarketError::BadPrice { .. })
        ));
    }

    #[test]
    fn price_step_log_returns_are_gaussian_with_ito_drift() {
        let params = MarketParams {
            coupling: 0.0,
            volatility_fn: VolatilityFn::ConstantOne,
            ..MarketParams::default()
        };
        let h = params.timestep;
        let mut rng = stream_rng(8, 3);
        let n = 1_000_000;
        let returns: Vec<f64> = (0..n)
            .map(|_| {
                let eta: f64 = rng.sample(StandardNormal);
                price_step(1.0, 0.0, 0.0, eta, &params).unwrap().ln()
            })
            .collect();
        let mean = returns.iter().sum::<f64>() / n as f64;
        let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n as f64;
        // SE(mean) = sqrt(h/n) = 2e-6, SE(var) ~ h * sqrt(2/n).
        assert!((mean + h / 2.0).abs() < 8e-6, "mean {mean}");
        assert!((var - h).abs() < 4e-8, "var {var}");
    }

    #[test]
    fn switch_moves_sentiment_now_and_price_next_step() {
        let params = MarketParams {
            num_agents: 1,
            threshold_noise: 0.0,
            volatility_fn: VolatilityFn::ConstantOne,
            rng_seed: 12,
            ..MarketParams::default()
        };
        // One agent whose interval sits far above the price, so the first
        // step must switch it.
        let state = hand_state(vec![tiny_agent(1, 2.0, 3.0, 1.0)], 1.0);
        let mut sim = MarketSim::with_state(params, state).unwrap();

        assert_eq!(sim.step(), 1);
        let p1 = sim.state().price;
        assert_eq!(sim.state().agents[0].state, -1);
        assert_eq!(sim.state().sentiment, -1.0);
        assert_eq!(sim.state().prev_sentiment, 1.0);
        // The switch happened after the price moved: no -0.2 kick yet.
        assert!(p1.ln().abs() < 0.05, "p1 = {p1}");
        let a = sim.state().agents[0];
        assert!(a.lower < p1 && p1 < a.upper);

        sim.step();
        let p2 = sim.state().price;
        // This step's exponent carries kappa * (sigma_1 - sigma_0) = -0.2.
        assert!(((p2 / p1).ln() + 0.2).abs() < 0.05, "p2/p1 = {}", p2 / p1);
    }

    #[test]
    fn sentiment_change_is_exactly_zero_without_switches() {
        let params = MarketParams {
            num_agents: 3,
            rng_seed: 13,
            ..MarketParams::default()
        };
        let agents = vec![
            tiny_agent(1, 1e-3, 1e3, 1.0),
            tiny_agent(-1, 1e-3, 1e3, 1.0),
            tiny_agent(-1, 1e-3, 1e3, 1.0),
        ];
        let s0 = -1.0 / 3.0;
        let state = hand_state(agents, 1.0);
        let mut sim = MarketSim::with_state(params, state).unwrap();
        for _ in 0..50 {
            assert_eq!(sim.step(), 0);
            assert_eq!(sim.state().sentiment, s0);
            assert_eq!(sim.state().prev_sentiment, s0);
        }
    }

    #[test]
    fn price_path_replays_the_price_stream_exactly_when_decoupled() {
        // kappa = 0 and f == 1 reduce the price to a geometric Brownian
        // motion driven by the price stream alone, whatever the agents do.
        let params = MarketParams {
            num_agents: 5,
            coupling: 0.0,
            volatility_fn: VolatilityFn::ConstantOne,
            rng_seed: 42,
            ..MarketParams::default()
        };
        let h = params.timestep;
        let out = run(&params, 3).unwrap();

        let mut rng = stream_rng(42, STREAM_PRICE);
        let mut p = 1.0;
        for rec in &out.days {
            for _ in 0..params.substeps_per_day {
                let eta: f64 = rng.sample(StandardNormal);
                p *= (h.sqrt() * eta * 1.0 - h / 2.0 + 0.0).exp();
            }
            assert_eq!(rec.price, p, "day {}", rec.day);
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic_in_the_seed() {
        let params = MarketParams {
            num_agents: 50,
            rng_seed: 14,
            ..MarketParams::default()
        };
        let a = run(&params, 20).unwrap();
        let b = run(&params, 20).unwrap();
        assert_eq!(a.days, b.days);
        assert_eq!(a.final_state, b.final_state);

        let other = MarketParams {
            rng_seed: 15,
            ..params
        };
        let c = run(&other, 20).unwrap();
        assert_ne!(a.days, c.days);
    }

    #[test]
    fn return_series_has_one_entry_per_day() {
        let params = MarketParams {
            num_agents: 10,
            rng_seed: 16,
            ..MarketParams::default()
        };
        let out = run(&params, 7).unwrap();
        let series = out.returns();
        assert_eq!(series.daily_log_returns.len(), 7);
        assert_eq!(series.substeps_per_day, 10);
        for (rec, r) in out.days.iter().zip(&series.daily_log_returns) {
            assert_eq!(rec.log_return, *r);
        }
        assert_eq!(out.final_state.step_index, 70);
    }

    #[test]
    fn every_agent_brackets_the_price_after_each_step() {
        let params = MarketParams {
            num_agents: 50,
            rng_seed: 17,
            ..MarketParams::default()
        };
        let mut sim = MarketSim::new(params).unwrap();
        for _ in 0..200 {
            sim.step();
            let p = sim.state().price;
            for a in &sim.state().agents {
                assert!(a.lower < p && p < a.upper);
            }
        }
    }

    #[test]
    fn incremental_sentiment_tracks_the_population() {
        let params = MarketParams {
            num_agents: 100,
            rng_seed: 18,
            ..MarketParams::default()
        };
        let mut sim = MarketSim::new(params).unwrap();
        for _ in 0..2500 {
            sim.step();
        }
        let s = sim.state().sentiment;
        let scratch = sentiment(&sim.state().agents, sim.state().total_weight).unwrap();
        assert!(s.abs() <= 1.0);
        assert!((s - scratch).abs() < 1e-9, "drift {}", (s - scratch).abs());
    }

    #[test]
    fn no_herding_returns_are_mesokurtic() {
        // C_i = 0 switches off the feedback; daily returns stay Gaussian.
        let params = MarketParams {
            num_agents: 300,
            herding_range: (0.0, 0.0),
            rng_seed: 11,
            ..MarketParams::default()
        };
        let out = run(&params, 12_000).unwrap();
        let returns: Vec<f64> = out.days.iter().map(|d| d.log_return).collect();
        let k = excess_kurtosis(&returns).unwrap();
        assert!(k.abs() < 0.2, "excess kurtosis {k}");
        let mean_sigma =
            out.days.iter().map(|d| d.sentiment).sum::<f64>() / out.days.len() as f64;
        assert!(mean_sigma.abs() < 0.15, "mean sentiment {mean_sigma}");
    }

    #[test]
    fn initial_threshold_densities_are_state_blind() {
        let params = MarketParams {
            num_agents: 20_000,
            rng_seed: 1,
            ..MarketParams::default()
        };
        let sim = MarketSim::new(params).unwrap();
        let spec = HistogramSpec::new(0.78, 0.96, 20).unwrap();
        let split = threshold_density(sim.state(), Side::Lower, true, spec);
        assert_eq!(split[0].0, 1);
        assert_eq!(split[1].0, -1);
        let total: u64 = split.iter().map(|(_, h)| h.total()).sum();
        assert_eq!(total, 20_000);
        let t = chi_square_two_sample(&split[0].1, &split[1].1, 10).unwrap();
        assert!(t.p_value > 0.01, "initial populations differ: p = {}", t.p_value);
    }

    #[test]
    fn herding_splits_the_threshold_densities() {
        let params = MarketParams {
            num_agents: 2000,
            rng_seed: 3,
            ..MarketParams::default()
        };
        let out = run(&params, 1500).unwrap();
        let p = out.final_state.price;
        let spec = HistogramSpec::new(0.75 * p, 1.02 * p, 30).unwrap();
        let split = threshold_density(&out.final_state, Side::Lower, true, spec);
        let (np, nm) = (split[0].1.total(), split[1].1.total());
        assert_eq!(np + nm, 2000);
        assert!(np > 100 && nm > 100, "degenerate split {np}/{nm}");
        let t = chi_square_two_sample(&split[0].1, &split[1].1, 10).unwrap();
        assert!(
            t.p_value < 0.01,
            "herding left no trace: p = {}, sigma = {}",
            t.p_value,
            out.final_state.sentiment
        );
    }

    #[test]
    fn combined_density_conserves_counts() {
        let params = MarketParams {
            num_agents: 500,
            rng_seed: 19,
            ..MarketParams::default()
        };
        let sim = MarketSim::new(params).unwrap();
        let spec = HistogramSpec::new(0.9, 1.1, 5).unwrap();
        let combined = threshold_density(sim.state(), Side::Upper, false, spec);
        assert_eq!(combined.len(), 1);
        assert_eq!(combined[0].0, 0);
        assert_eq!(combined[0].1.total(), 500);
    }

    #[test]
    fn with_state_rejects_inconsistencies() {
        let params = MarketParams {
            num_agents: 2,
            ..MarketParams::default()
        };
        let good = hand_state(
            vec![tiny_agent(1, 0.9, 1.1, 1.0), tiny_agent(-1, 0.9, 1.1, 1.0)],
            1.0,
        );
        assert!(MarketSim::with_state(params.clone(), good.clone()).is_ok());

        let mut wrong_count = good.clone();
        wrong_count.agents.pop();
        let mut bad_sentiment = good.clone();
        bad_sentiment.sentiment = 0.5;
        let mut bad_price = good.clone();
        bad_price.price = -1.0;
        let mut bad_state = good.clone();
        bad_state.agents[0].state = 2;
        let mut bad_weight = good.clone();
        bad_weight.agents[0].weight = 0.0;
        let mut bad_prev = good;
        bad_prev.prev_sentiment = 1.5;

        for s in [
            wrong_count,
            bad_sentiment,
            bad_price,
            bad_state,
            bad_weight,
            bad_prev,
        ] {
            assert!(matches!(
                MarketSim::with_state(params.clone(), s),
                Err(MarketError::BadState { .. })
            ));
        }
    }
}
