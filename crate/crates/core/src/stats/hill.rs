//! Hill estimator of a power-law tail exponent.

use super::StatsError;

/// A tail-exponent estimate from the top `k_used` order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub exponent: f64,
    pub k_used: usize,
    /// Asymptotic standard error, `exponent / sqrt(k)`.
    pub standard_error: f64,
}

/// Hill estimator over the top-`k` order statistics of `|samples|`.
///
/// `alpha = k / sum_{i=1..k} ln(x_(i) / x_(k+1))` with `x_(1) >= x_(2) >= ...`
/// the absolute samples in decreasing order. Requires `10 <= k < n/2`, where
/// `n` counts the strictly positive absolute values.
pub fn hill_estimate(samples: &[f64], k: usize) -> Result<TailEstimate, StatsError> {
    let mut abs: Vec<f64> = samples
        .iter()
        .map(|x| x.abs())
        .filter(|x| *x > 0.0 && x.is_finite())
        .collect();
    if abs.is_empty() {
        return Err(StatsError::NoPositiveSamples);
    }
    let n = abs.len();
    if k < 10 || k >= n / 2 {
        return Err(StatsError::TailOrderOutOfRange { k, limit: n / 2 });
    }
    abs.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    hill_on_sorted_desc(&abs, k)
}

fn hill_on_sorted_desc(sorted_desc: &[f64], k: usize) -> Result<TailEstimate, StatsError> {
    let x_k = sorted_desc[k];
    if x_k <= 0.0 {
        return Err(StatsError::NoPositiveSamples);
    }
    let sum_log: f64 = sorted_desc[..k].iter().map(|&x| (x / x_k).ln()).sum();
    if sum_log <= 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let exponent = k as f64 / sum_log;
    Ok(TailEstimate {
        exponent,
        k_used: k,
        standard_error: exponent / (k as f64).sqrt(),
    })
}

/// A sweep of Hill estimates over a grid of `k` values, with a drift
/// diagnostic for detecting the absence of a power-law tail.
#[derive(Debug, Clone)]
pub struct HillStability {
    /// `(k, estimate)` pairs in increasing `k`.
    pub estimates: Vec<(usize, TailEstimate)>,
    /// Least-squares slope of the exponent against `k`.
    pub drift_slope: f64,
}

impl HillStability {
    /// Total drift of the fitted line across the grid, relative to the mean
    /// exponent. Near zero for a genuine power-law tail; large when the
    /// estimate keeps climbing as `k` shrinks (e.g. exponential data).
    pub fn relative_drift(&self) -> f64 {
        let k_lo = self.estimates.first().map(|(k, _)| *k).unwrap_or(0) as f64;
        let k_hi = self.estimates.last().map(|(k, _)| *k).unwrap_or(0) as f64;
        let mean = self
            .estimates
            .iter()
            .map(|(_, e)| e.exponent)
            .sum::<f64>()
            / self.estimates.len() as f64;
        (self.drift_slope * (k_hi - k_lo) / mean).abs()
    }

    /// Instability flag: fitted drift across the grid exceeds 25% of the
    /// mean exponent.
    pub fn flagged_unstable(&self) -> bool {
        self.relative_drift() > 0.25
    }
}

/// Hill estimates over a grid of `k` values (sorted, deduplicated).
pub fn hill_stability(samples: &[f64], ks: &[usize]) -> Result<HillStability, StatsError> {
    let mut abs: Vec<f64> = samples
        .iter()
        .map(|x| x.abs())
        .filter(|x| *x > 0.0 && x.is_finite())
        .collect();
    if abs.is_empty() {
        return Err(StatsError::NoPositiveSamples);
    }
    abs.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let n = abs.len();

    let mut grid: Vec<usize> = ks.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut estimates = Vec::with_capacity(grid.len());
    for k in grid {
        if k < 10 || k >= n / 2 {
            return Err(StatsError::TailOrderOutOfRange { k, limit: n / 2 });
        }
        estimates.push((k, hill_on_sorted_desc(&abs, k)?));
    }
    if estimates.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: estimates.len(),
        });
    }

    // Least-squares slope of exponent vs k over the grid.
    let m = estimates.len() as f64;
    let kbar = estimates.iter().map(|(k, _)| *k as f64).sum::<f64>() / m;
    let ebar = estimates.iter().map(|(_, e)| e.exponent).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, e) in &estimates {
        let dk = *k as f64 - kbar;
        sxy += dk * (e.exponent - ebar);
        sxx += dk * dk;
    }
    Ok(HillStability {
        estimates,
        drift_slope: sxy / sxx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_distr::{Distribution, Exp1};

    fn pareto(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
        // Inverse CDF: x_min * U^(-1/alpha) with x_min = 1.
        let mut rng = stream_rng(seed, 98);
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(0.0..1.0);
                (1.0 - u).powf(-1.0 / alpha)
            })
            .collect()
    }

    #[test]
    fn recovers_pareto_exponents() {
        // Synthetic oracles: exact Pareto tails with known alpha.
        let e3 = hill_estimate(&pareto(3.0, 100_000, 11), 1000).unwrap();
        assert!(
            (e3.exponent - 3.0).abs() < 0.3,
            "alpha=3 estimate {}",
            e3.exponent
        );
        let e2 = hill_estimate(&pareto(2.0, 100_000, 12), 1000).unwrap();
        assert!(
            (e2.exponent - 2.0).abs() < 0.2,
            "alpha=2 estimate {}",
            e2.exponent
        );
        assert_eq!(e3.k_used, 1000);
        assert!((e3.standard_error - e3.exponent / 1000f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exponential_data_is_flagged_unstable() {
        let mut rng = stream_rng(13, 98);
        let samples: Vec<f64> = (0..100_000).map(|_| Exp1.sample(&mut rng)).collect();
        let ks: Vec<usize> = (1..=20).map(|i| i * 250).collect();
        let sweep = hill_stability(&samples, &ks).unwrap();
        assert!(
            sweep.flagged_unstable(),
            "exponential drift {} should flag",
            sweep.relative_drift()
        );
        // Estimates drift upward as k shrinks: slope vs k is negative.
        assert!(sweep.drift_slope < 0.0);

        let stable = hill_stability(&pareto(3.0, 100_000, 14), &ks).unwrap();
        assert!(
            !stable.flagged_unstable(),
            "pareto drift {} should not flag",
            stable.relative_drift()
        );
    }

    #[test]
    fn scale_invariance() {
        let samples = pareto(3.0, 50_000, 15);
        let scaled: Vec<f64> = samples.iter().map(|x| x * 1234.5).collect();
        let a = hill_estimate(&samples, 500).unwrap();
        let b = hill_estimate(&scaled, 500).unwrap();
        assert!(
            (a.exponent - b.exponent).abs() < 1e-9,
            "{} vs {}",
            a.exponent,
            b.exponent
        );
    }

    #[test]
    fn rejects_bad_k() {
        let samples = pareto(3.0, 1000, 16);
        assert!(matches!(
            hill_estimate(&samples, 9),
            Err(StatsError::TailOrderOutOfRange { .. })
        ));
        assert!(matches!(
            hill_estimate(&samples, 500),
            Err(StatsError::TailOrderOutOfRange { .. })
        ));
    }
}
