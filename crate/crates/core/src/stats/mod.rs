//! Stylized-facts measurement: excess kurtosis, Hill tail-exponent
//! estimation, autocorrelation with noise bands, and histogram/CDF helpers.
//!
//! Everything here is a pure function of its input slice; results are
//! reproducible given identical input order and permutation-invariant where
//! the statistic itself is.

mod hill;
mod hist;

pub use hill::{hill_estimate, hill_stability, HillStability, TailEstimate};
pub use hist::{
    chi_square_two_sample, ks_two_sample, ChiSquareTest, Ecdf, Histogram, HistogramSpec,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("samples have zero variance; statistic undefined")]
    DegenerateVariance,
    #[error("tail order k={k} out of range; need 10 <= k < n/2 = {limit}")]
    TailOrderOutOfRange { k: usize, limit: usize },
    #[error("no strictly positive samples for tail estimation")]
    NoPositiveSamples,
    #[error("max_lag {max_lag} must be below n/4 = {limit}")]
    LagTooLarge { max_lag: usize, limit: usize },
    #[error("histogram needs at least one bin")]
    EmptyBins,
    #[error("histogram range [{lo}, {hi}) is empty or not finite")]
    BadRange { lo: f64, hi: f64 },
    #[error("histograms have mismatched binning")]
    BinMismatch,
    #[error("chi-square test needs nonempty histograms")]
    EmptyHistogram,
}

/// Sample excess kurtosis: fourth standardized moment minus 3.
///
/// Uses the biased (moment) definition `m4 / m2^2 - 3`; zero for a Gaussian
/// in the large-sample limit.
pub fn excess_kurtosis(samples: &[f64]) -> Result<f64, StatsError> {
    if samples.len() < 4 {
        return Err(StatsError::TooFewSamples {
            needed: 4,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if m2 <= 0.0 || !m2.is_finite() {
        return Err(StatsError::DegenerateVariance);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Autocorrelation estimates at lags `1..=max_lag` with the +-1.96/sqrt(n)
/// white-noise band attached.
#[derive(Debug, Clone)]
pub struct Acf {
    /// `values[k-1]` is the estimate at lag `k`.
    pub values: Vec<f64>,
    /// Approximate 95% band for a white series.
    pub noise_band: f64,
}

impl Acf {
    /// Number of lags whose estimate lies strictly inside the noise band.
    pub fn lags_within_band(&self) -> usize {
        self.values
            .iter()
            .filter(|v| v.abs() < self.noise_band)
            .count()
    }

    /// Fraction of lags inside the noise band.
    pub fn fraction_within_band(&self) -> f64 {
        self.lags_within_band() as f64 / self.values.len() as f64
    }

    /// True if every lag is positive and above the noise band.
    pub fn all_positive_beyond_band(&self) -> bool {
        self.values.iter().all(|&v| v > self.noise_band)
    }
}

/// Standard biased ACF estimate at lags `1..=max_lag`.
pub fn autocorrelation(samples: &[f64], max_lag: usize) -> Result<Acf, StatsError> {
    let n = samples.len();
    if max_lag >= n / 4 {
        return Err(StatsError::LagTooLarge {
            max_lag,
            limit: n / 4,
        });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let denom: f64 = samples.iter().map(|&x| (x - mean) * (x - mean)).sum();
    if denom <= 0.0 || !denom.is_finite() {
        return Err(StatsError::DegenerateVariance);
    }
    let mut values = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let mut num = 0.0;
        for t in 0..n - lag {
            num += (samples[t] - mean) * (samples[t + lag] - mean);
        }
        values.push(num / denom);
    }
    Ok(Acf {
        values,
        noise_band: 1.96 / nf.sqrt(),
    })
}
