//! Browser bindings for the demo page in `www/`.
//!
//! Every operation takes a JSON request and returns a JSON response as plain
//! strings, so the ABI stays trivial and the same functions run natively in
//! the unit tests. Failures come back as `{"error": "..."}` rather than a
//! thrown exception; the page checks for that field.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

use thresholdq::analytics::busy_density_mm1;
use thresholdq::cascade::{sample_cascades, FieldGenerator, ThresholdField, WeightDist};
use thresholdq::market::{self, MarketParams, VolatilityFn};
use thresholdq::queue::{sample_busy_periods, QueueParams};
use thresholdq::stats::{autocorrelation, excess_kurtosis, hill_estimate};

/// Demo budget: enough for every stylized fact to show, small enough that a
/// browser tab stays responsive.
const MAX_AGENTS: usize = 20_000;
const MAX_DAYS: usize = 20_000;
const MAX_SAMPLES: usize = 1_000_000;

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    #[derive(Serialize)]
    struct Failure {
        error: String,
    }
    match result {
        Ok(v) => serde_json::to_string(&v).expect("response serializes"),
        Err(error) => serde_json::to_string(&Failure { error }).expect("error serializes"),
    }
}

fn parse<'a, T: Deserialize<'a>>(request: &'a str) -> Result<T, String> {
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MarketRequest {
    num_agents: usize,
    days: usize,
    seed: u64,
    coupling: f64,
    flat_volatility: bool,
}

impl Default for MarketRequest {
    fn default() -> Self {
        MarketRequest {
            num_agents: 1000,
            days: 2520,
            seed: 1,
            coupling: 0.1,
            flat_volatility: false,
        }
    }
}

#[derive(Serialize)]
struct MarketResponse {
    prices: Vec<f64>,
    log_returns: Vec<f64>,
    sentiment: Vec<f64>,
    excess_kurtosis: Option<f64>,
    hill_exponent: Option<f64>,
    abs_acf: Vec<f64>,
    acf_noise_band: f64,
}

fn market_response(request: &str) -> Result<MarketResponse, String> {
    let req: MarketRequest = parse(request)?;
    if req.num_agents == 0 || req.num_agents > MAX_AGENTS {
        return Err(format!("num_agents must be in 1..={MAX_AGENTS}"));
    }
    if req.days == 0 || req.days > MAX_DAYS {
        return Err(format!("days must be in 1..={MAX_DAYS}"));
    }
    let params = MarketParams {
        num_agents: req.num_agents,
        coupling: req.coupling,
        volatility_fn: if req.flat_volatility {
            VolatilityFn::ConstantOne
        } else {
            MarketParams::default().volatility_fn
        },
        rng_seed: req.seed,
        ..MarketParams::default()
    };
    let out = market::run(&params, req.days).map_err(|e| e.to_string())?;
    let returns = out.returns().daily_log_returns;

    let abs: Vec<f64> = returns.iter().map(|r| r.abs()).collect();
    let max_lag = 50.min((returns.len() / 4).saturating_sub(1));
    let (abs_acf, band) = match autocorrelation(&abs, max_lag) {
        Ok(acf) => (acf.values, acf.noise_band),
        Err(_) => (Vec::new(), 0.0),
    };
    let hill_k = (returns.len() / 100).max(10);
    Ok(MarketResponse {
        prices: out.days.iter().map(|d| d.price).collect(),
        sentiment: out.days.iter().map(|d| d.sentiment).collect(),
        excess_kurtosis: excess_kurtosis(&returns).ok(),
        hill_exponent: hill_estimate(&returns, hill_k).ok().map(|h| h.exponent),
        abs_acf,
        acf_noise_band: band,
        log_returns: returns,
    })
}

/// Run the threshold market and return the daily series plus the headline
/// diagnostics (excess kurtosis, Hill exponent, |return| autocorrelation).
#[wasm_bindgen]
pub fn market_demo(request: &str) -> String {
    respond(market_response(request))
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BusyRequest {
    lambda: f64,
    n_samples: usize,
    seed: u64,
    bins: usize,
}

impl Default for BusyRequest {
    fn default() -> Self {
        BusyRequest {
            lambda: 0.5,
            n_samples: 100_000,
            seed: 1,
            bins: 120,
        }
    }
}

#[derive(Serialize)]
struct BusyResponse {
    t: Vec<f64>,
    analytic_density: Vec<f64>,
    empirical_density: Vec<f64>,
    mean_analytic: f64,
    mean_empirical: f64,
}

fn busy_response(request: &str) -> Result<BusyResponse, String> {
    let req: BusyRequest = parse(request)?;
    if !(req.lambda > 0.0 && req.lambda < 1.0) {
        return Err("lambda must lie in (0, 1); the service rate is fixed at 1".into());
    }
    if req.n_samples < 100 || req.n_samples > MAX_SAMPLES {
        return Err(format!("n_samples must be in 100..={MAX_SAMPLES}"));
    }
    if !(2..=400).contains(&req.bins) {
        return Err("bins must be in 2..=400".into());
    }
    let params = QueueParams {
        arrival: thresholdq::queue::RateFn::Constant(req.lambda),
        ..QueueParams::default()
    };
    let sample = sample_busy_periods(&params, req.n_samples, req.seed, None)
        .map_err(|e| e.to_string())?;
    let mut durations = sample.durations;
    durations.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mean_empirical = durations.iter().sum::<f64>() / durations.len() as f64;

    // Plot out to the empirical 99.5% quantile; the extreme tail would just
    // flatten the interesting part of the curve.
    let q = durations[(durations.len() as f64 * 0.995) as usize % durations.len()];
    let dt = q / req.bins as f64;
    let mut counts = vec![0u64; req.bins];
    for &d in &durations {
        if d < q {
            counts[(d / dt) as usize] += 1;
        }
    }
    let norm = 1.0 / (durations.len() as f64 * dt);
    let t: Vec<f64> = (0..req.bins).map(|i| (i as f64 + 0.5) * dt).collect();
    let analytic_density = t
        .iter()
        .map(|&x| busy_density_mm1(x, req.lambda, 1.0).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok(BusyResponse {
        analytic_density,
        empirical_density: counts.iter().map(|&c| c as f64 * norm).collect(),
        t,
        mean_analytic: 1.0 / (1.0 - req.lambda),
        mean_empirical,
    })
}

/// Simulate M/M/1 busy periods at the requested load and compare their
/// histogram against the closed-form density.
#[wasm_bindgen]
pub fn busy_demo(request: &str) -> String {
    respond(busy_response(request))
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CascadeRequest {
    rate: f64,
    anti_fraction: f64,
    n_samples: usize,
    seed: u64,
}

impl Default for CascadeRequest {
    fn default() -> Self {
        CascadeRequest {
            rate: 0.5,
            anti_fraction: 0.0,
            n_samples: 100_000,
            seed: 1,
        }
    }
}

#[derive(Serialize)]
struct CascadeResponse {
    drop_size: Vec<f64>,
    empirical_pmf: Vec<f64>,
    borel_pmf: Vec<f64>,
    mean_drop: f64,
    mean_predicted: f64,
    truncated: u64,
}

fn cascade_response(request: &str) -> Result<CascadeResponse, String> {
    let req: CascadeRequest = parse(request)?;
    if !(req.rate > 0.0 && req.rate < 1.0) {
        return Err("rate must lie in (0, 1) so cascades stay subcritical".into());
    }
    if !(0.0..=0.5).contains(&req.anti_fraction) {
        return Err("anti_fraction must lie in [0, 0.5]".into());
    }
    if req.n_samples < 100 || req.n_samples > MAX_SAMPLES {
        return Err(format!("n_samples must be in 100..={MAX_SAMPLES}"));
    }
    // Unit-weight field at unit jump scale: with no contrarians the drops sit
    // on the integer lattice and follow the Borel distribution.
    let field = ThresholdField {
        entries: Vec::new(),
        coupling: 1.0,
        total_weight: 2.0,
        generator: Some(FieldGenerator {
            poisson_rate: req.rate,
            weight_dist: WeightDist::Constant { w: 1.0 },
            anti_fraction: req.anti_fraction,
        }),
    };
    let sample =
        sample_cascades(&field, 1.0, req.n_samples, req.seed, 1_000_000).map_err(|e| e.to_string())?;
    let mean_drop = sample.drops.iter().sum::<f64>() / sample.drops.len() as f64;

    let k_max = 30usize;
    let mut counts = vec![0u64; k_max];
    for &d in &sample.drops {
        let k = d.round() as usize;
        if (1..=k_max).contains(&k) {
            counts[k - 1] += 1;
        }
    }
    // ln P(N = n) = -n rate + (n - 1) ln(n rate) - ln n!
    let mut borel_pmf = Vec::with_capacity(k_max);
    let mut ln_fact = 0.0;
    for n in 1..=k_max {
        let nf = n as f64;
        ln_fact += nf.ln();
        borel_pmf.push((-nf * req.rate + (nf - 1.0) * (nf * req.rate).ln() - ln_fact).exp());
    }
    Ok(CascadeResponse {
        drop_size: (1..=k_max).map(|k| k as f64).collect(),
        empirical_pmf: counts
            .iter()
            .map(|&c| c as f64 / sample.drops.len() as f64)
            .collect(),
        borel_pmf,
        mean_drop,
        mean_predicted: 1.0 / (1.0 - req.rate),
        truncated: sample.truncated_count,
    })
}

/// Sample cascades on the random unit-weight landscape and compare the drop
/// distribution with the Borel law for M/D/1 busy periods. A nonzero
/// contrarian fraction breaks the lattice and shows how the correspondence
/// degrades.
#[wasm_bindgen]
pub fn cascade_demo(request: &str) -> String {
    respond(cascade_response(request))
}
