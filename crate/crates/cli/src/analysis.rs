//! Return-series diagnostics shared by `simulate` and `analyze`: summary
//! statistics, autocorrelations, and the Hill sweep.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use thresholdq::csvio::{fmt_f64, write_header};
use thresholdq::stats::{autocorrelation, excess_kurtosis, hill_estimate, hill_stability, Acf};

use crate::config::AnalysisBlock;

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// One `metric,value` table. Values are preformatted so counts stay integers.
pub fn write_summary(dir: &Path, rows: &[(&str, String)]) -> Result<()> {
    let mut w = create(dir, "summary.csv")?;
    write_header(&mut w, "summary", &["metric", "value"])?;
    for (metric, value) in rows {
        writeln!(w, "{metric},{value}")?;
    }
    w.flush()?;
    Ok(())
}

fn acf_at(samples: &[f64], max_lag: usize) -> Result<Option<Acf>> {
    // The estimator needs max_lag < n/4; clamp rather than error so short
    // runs still produce the full table set.
    let limit = samples.len() / 4;
    let lag = max_lag.min(limit.saturating_sub(1));
    if lag == 0 {
        return Ok(None);
    }
    Ok(Some(autocorrelation(samples, lag)?))
}

fn hill_orders(block: &AnalysisBlock, n: usize) -> Vec<usize> {
    let mut grid = if block.hill_grid.is_empty() {
        vec![n / 200, n / 100, n / 50, n / 20]
    } else {
        block.hill_grid.clone()
    };
    grid.retain(|&k| k >= 10 && k < n / 2);
    grid.sort_unstable();
    grid.dedup();
    grid
}

fn headline_k(block: &AnalysisBlock, n: usize) -> Option<usize> {
    let k = block.hill_k.unwrap_or_else(|| (n / 100).max(10));
    (k >= 10 && k < n / 2).then_some(k)
}

/// Writes `summary.csv`, `acf.csv`, and `hill.csv` for one return series.
/// `extra` rows lead the summary so callers can add run-level facts.
pub fn analyze_returns(
    dir: &Path,
    block: &AnalysisBlock,
    returns: &[f64],
    extra: &[(&str, String)],
) -> Result<()> {
    let n = returns.len();
    let abs: Vec<f64> = returns.iter().map(|r| r.abs()).collect();
    let mean = returns.iter().sum::<f64>() / n.max(1) as f64;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n.max(1) as f64;
    let kurt = excess_kurtosis(returns).map(Some).or_else(|e| {
        // Short or constant series: report nan instead of failing the run.
        use thresholdq::stats::StatsError;
        match e {
            StatsError::TooFewSamples { .. } | StatsError::DegenerateVariance => Ok(None),
            other => Err(other),
        }
    })?;

    let acf_r = acf_at(returns, block.max_lag)?;
    let acf_abs = acf_at(&abs, block.max_lag)?;
    {
        let mut w = create(dir, "acf.csv")?;
        write_header(
            &mut w,
            "acf",
            &["lag", "acf_return", "acf_abs_return", "noise_band"],
        )?;
        if let (Some(r), Some(a)) = (&acf_r, &acf_abs) {
            for (i, (vr, va)) in r.values.iter().zip(&a.values).enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    i + 1,
                    fmt_f64(*vr),
                    fmt_f64(*va),
                    fmt_f64(r.noise_band)
                )?;
            }
        }
        w.flush()?;
    }

    // Hill sweep on |returns|; the tail claim is about magnitudes.
    let grid = hill_orders(block, n);
    let mut drift = None;
    {
        let mut w = create(dir, "hill.csv")?;
        write_header(&mut w, "hill", &["k", "exponent", "standard_error"])?;
        for &k in &grid {
            let est = hill_estimate(&abs, k)?;
            writeln!(
                w,
                "{},{},{}",
                est.k_used,
                fmt_f64(est.exponent),
                fmt_f64(est.standard_error)
            )?;
        }
        if grid.len() >= 2 {
            drift = Some(hill_stability(&abs, &grid)?.relative_drift());
        }
        w.flush()?;
    }
    let headline = match headline_k(block, n) {
        Some(k) => Some(hill_estimate(&abs, k)?),
        None => None,
    };

    let fmt_opt = |v: Option<f64>| fmt_f64(v.unwrap_or(f64::NAN));
    let mut rows: Vec<(&str, String)> = extra.to_vec();
    rows.extend([
        ("n_returns", n.to_string()),
        ("mean_return", fmt_f64(mean)),
        ("std_return", fmt_f64(var.sqrt())),
        ("excess_kurtosis", fmt_opt(kurt)),
        ("hill_k", headline.as_ref().map_or("nan".into(), |e| e.k_used.to_string())),
        (
            "hill_exponent",
            fmt_opt(headline.as_ref().map(|e| e.exponent)),
        ),
        (
            "hill_standard_error",
            fmt_opt(headline.as_ref().map(|e| e.standard_error)),
        ),
        ("hill_relative_drift", fmt_opt(drift)),
    ]);
    if let (Some(r), Some(a)) = (&acf_r, &acf_abs) {
        rows.push(("acf_max_lag", r.values.len().to_string()));
        rows.push(("acf_noise_band", fmt_f64(r.noise_band)));
        rows.push(("acf_return_within_band", r.lags_within_band().to_string()));
        rows.push(("acf_abs_within_band", a.lags_within_band().to_string()));
        rows.push((
            "acf_abs_all_beyond_band",
            (a.all_positive_beyond_band() as u8).to_string(),
        ));
    } else {
        rows.push(("acf_max_lag", "0".into()));
    }
    write_summary(dir, &rows)
}
