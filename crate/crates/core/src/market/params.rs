//! Market configuration.

use serde::{Deserialize, Serialize};

use super::MarketError;

/// Amplitude `f` applied to the Wiener term of the price update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolatilityFn {
    /// `f == 1`: the price is a plain geometric Brownian motion between
    /// sentiment kicks.
    ConstantOne,
    /// `f(sigma) = a + b*|sigma|`: a polarized market is more volatile.
    SentimentLinear { a: f64, b: f64 },
}

impl VolatilityFn {
    pub fn eval(&self, sentiment: f64) -> f64 {
        match *self {
            VolatilityFn::ConstantOne => 1.0,
            VolatilityFn::SentimentLinear { a, b } => a + b * sentiment.abs(),
        }
    }

    fn validate(&self) -> Result<(), MarketError> {
        match *self {
            VolatilityFn::ConstantOne => Ok(()),
            VolatilityFn::SentimentLinear { a, b } => {
                if a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0 {
                    Ok(())
                } else {
                    Err(MarketError::BadParams {
                        reason: "sentiment_linear coefficients must be finite and nonnegative",
                    })
                }
            }
        }
    }
}

/// How `threshold_noise` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    /// `threshold_noise` is a variance; draws use standard deviation
    /// `sqrt(threshold_noise)`.
    #[default]
    Variance,
    /// `threshold_noise` is the standard deviation itself.
    StdDev,
}

/// Model constants. `Default` gives the reference configuration: `h = 4e-6`,
/// `kappa = 0.1`, reset offsets uniform on `[0.05, 0.25]`, herding
/// coefficients uniform on `[20, 100]`, `f = 1 + 2|sigma|`, ten substeps
/// per trading day, unit weights, and initial price 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarketParams {
    pub num_agents: usize,
    /// Substep length `h`; the Wiener increment scales as `sqrt(h)`.
    pub timestep: f64,
    /// Sentiment-change coefficient `kappa` in the price exponent.
    pub coupling: f64,
    /// Threshold noise level `delta`, interpreted per `noise_scale`.
    pub threshold_noise: f64,
    pub noise_scale: NoiseScale,
    /// Range of `Z_L`; a switch at price `p` resets `lower = p / (1 + Z_L)`.
    pub reset_low_range: (f64, f64),
    /// Range of `Z_U`; a switch at price `p` resets `upper = p * (1 + Z_U)`.
    pub reset_high_range: (f64, f64),
    /// Range the per-agent herding coefficients `C_i` are drawn from.
    pub herding_range: (f64, f64),
    pub volatility_fn: VolatilityFn,
    pub substeps_per_day: u32,
    pub rng_seed: u64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            num_agents: 100_000,
            timestep: 4e-6,
            coupling: 0.1,
            threshold_noise: 1e-8,
            noise_scale: NoiseScale::Variance,
            reset_low_range: (0.05, 0.25),
            reset_high_range: (0.05, 0.25),
            herding_range: (20.0, 100.0),
            volatility_fn: VolatilityFn::SentimentLinear { a: 1.0, b: 2.0 },
            substeps_per_day: 10,
            rng_seed: 0,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<(), MarketError> {
        let bad = |reason| Err(MarketError::BadParams { reason });
        if self.num_agents == 0 {
            return bad("num_agents must be at least 1");
        }
        if !(self.timestep.is_finite() && self.timestep > 0.0) {
            return bad("timestep must be positive and finite");
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return bad("coupling must be nonnegative and finite");
        }
        if !(self.threshold_noise.is_finite() && self.threshold_noise >= 0.0) {
            return bad("threshold_noise must be nonnegative and finite");
        }
        for (lo, hi) in [self.reset_low_range, self.reset_high_range] {
            // Z > 0 keeps the reset interval an open bracket of the price.
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return bad("reset ranges must satisfy 0 < lo <= hi");
            }
        }
        let (lo, hi) = self.herding_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
            return bad("herding_range must satisfy 0 <= lo <= hi");
        }
        self.volatility_fn.validate()?;
        if self.substeps_per_day == 0 {
            return bad("substeps_per_day must be at least 1");
        }
        Ok(())
    }

    /// Standard deviation of one threshold noise draw.
    pub fn noise_std(&self) -> f64 {
        match self.noise_scale {
            NoiseScale::Variance => self.threshold_noise.sqrt(),
            NoiseScale::StdDev => self.threshold_noise,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(MarketParams::default().validate().is_ok());
    }

    #[test]
    fn volatility_eval() {
        assert_eq!(VolatilityFn::ConstantOne.eval(0.7), 1.0);
        let f = VolatilityFn::SentimentLinear { a: 1.0, b: 2.0 };
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(-0.5), 2.0);
    }

    #[test]
    fn noise_std_follows_scale() {
        let mut p = MarketParams {
            threshold_noise: 1e-8,
            ..MarketParams::default()
        };
        assert_eq!(p.noise_std(), 1e-4);
        p.noise_scale = NoiseScale::StdDev;
        assert_eq!(p.noise_std(), 1e-8);
    }

    #[test]
    fn rejects_bad_fields() {
        let cases = [
            MarketParams {
                num_agents: 0,
                ..MarketParams::default()
            },
            MarketParams {
                timestep: 0.0,
                ..MarketParams::default()
            },
            MarketParams {
                coupling: -0.1,
                ..MarketParams::default()
            },
            MarketParams {
                threshold_noise: f64::NAN,
                ..MarketParams::default()
            },
            MarketParams {
                reset_low_range: (0.0, 0.25),
                ..MarketParams::default()
            },
            MarketParams {
                reset_high_range: (0.25, 0.05),
                ..MarketParams::default()
            },
            MarketParams {
                herding_range: (-1.0, 5.0),
                ..MarketParams::default()
            },
            MarketParams {
                volatility_fn: VolatilityFn::SentimentLinear { a: -1.0, b: 2.0 },
                ..MarketParams::default()
            },
            MarketParams {
                substeps_per_day: 0,
                ..MarketParams::default()
            },
        ];
        for p in cases {
            assert!(
                matches!(p.validate(), Err(MarketError::BadParams { .. })),
                "{p:?} should be rejected"
            );
        }
    }

    #[test]
    fn toml_round_trip() {
        let p = MarketParams {
            num_agents: 1000,
            volatility_fn: VolatilityFn::SentimentLinear { a: 1.0, b: 2.0 },
            noise_scale: NoiseScale::StdDev,
            ..MarketParams::default()
        };
        let text = toml::to_string(&p).unwrap();
        let back: MarketParams = toml::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let p: MarketParams = toml::from_str("num_agents = 42\nrng_seed = 7").unwrap();
        assert_eq!(p.num_agents, 42);
        assert_eq!(p.rng_seed, 7);
        assert_eq!(p.timestep, 4e-6);
        assert_eq!(
            p.volatility_fn,
            VolatilityFn::SentimentLinear { a: 1.0, b: 2.0 }
        );
    }
}
