//! Histograms, empirical CDFs, and two-sample tests.

use super::StatsError;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Equal-width binning over `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl HistogramSpec {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self, StatsError> {
        if bins == 0 {
            return Err(StatsError::EmptyBins);
        }
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(StatsError::BadRange { lo, hi });
        }
        Ok(Self { lo, hi, bins })
    }

    fn bin_of(&self, x: f64) -> usize {
        // Out-of-range values land in the edge bins so totals are conserved.
        let w = (self.hi - self.lo) / self.bins as f64;
        let i = ((x - self.lo) / w).floor();
        (i.max(0.0) as usize).min(self.bins - 1)
    }
}

/// Counts per bin under a [`HistogramSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub spec: HistogramSpec,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_samples<I>(spec: HistogramSpec, samples: I) -> Self
    where
        I: IntoIterator<Item = f64>,
    {
        let mut counts = vec![0u64; spec.bins];
        for x in samples {
            counts[spec.bin_of(x)] += 1;
        }
        Self { spec, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(lo, hi)` edges of bin `i`.
    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = (self.spec.hi - self.spec.lo) / self.spec.bins as f64;
        (
            self.spec.lo + i as f64 * w,
            self.spec.lo + (i + 1) as f64 * w,
        )
    }
}

/// Result of a two-sample chi-square homogeneity test.
#[derive(Debug, Clone)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square test that the two histograms draw from the same
/// distribution. Adjacent bins are merged until each merged cell holds at
/// least `min_combined` counts across both samples.
pub fn chi_square_two_sample(
    a: &Histogram,
    b: &Histogram,
    min_combined: u64,
) -> Result<ChiSquareTest, StatsError> {
    if a.spec != b.spec {
        return Err(StatsError::BinMismatch);
    }
    let (na, nb) = (a.total(), b.total());
    if na == 0 || nb == 0 {
        return Err(StatsError::EmptyHistogram);
    }

    // Merge sparse adjacent bins.
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let (mut acc_a, mut acc_b) = (0u64, 0u64);
    for i in 0..a.counts.len() {
        acc_a += a.counts[i];
        acc_b += b.counts[i];
        if acc_a + acc_b >= min_combined {
            cells.push((acc_a, acc_b));
            acc_a = 0;
            acc_b = 0;
        }
    }
    if acc_a + acc_b > 0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc_a;
            last.1 += acc_b;
        } else {
            cells.push((acc_a, acc_b));
        }
    }
    if cells.len() < 2 {
        return Err(StatsError::EmptyHistogram);
    }

    let k1 = (nb as f64 / na as f64).sqrt();
    let k2 = (na as f64 / nb as f64).sqrt();
    let mut stat = 0.0;
    for (ra, rb) in &cells {
        let (ra, rb) = (*ra as f64, *rb as f64);
        let d = k1 * ra - k2 * rb;
        stat += d * d / (ra + rb);
    }
    let dof = cells.len() - 1;
    let chi = ChiSquared::new(dof as f64).expect("dof >= 1");
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        p_value: 1.0 - chi.cdf(stat),
    })
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
///
/// Handles ties (including lattice-valued samples) by comparing the two
/// empirical CDFs only after consuming every sample equal to the current
/// value from both sides.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// An empirical CDF backed by a sorted copy of the samples.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Self { sorted }
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.sorted.partition_point(|&v| v <= x);
        idx as f64 / self.sorted.len() as f64
    }

    /// Survival function, fraction of samples `> x`.
    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.eval(x)
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}
