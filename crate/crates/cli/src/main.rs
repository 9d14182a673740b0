//! thresholdq: threshold-agent market runs, cascade sampling, busy-period
//! simulation, and the matching closed-form queue quantities, all driven by
//! one TOML configuration.

mod analysis;
mod config;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use thresholdq::analytics::{
    busy_cdf_mm1, busy_density_mm1, busy_moment_mm1, tail_prediction, TailSpec,
};
use thresholdq::cascade::sample_cascades;
use thresholdq::csvio::{self, fmt_f64, write_header};
use thresholdq::market::{self, MarketState, Side};
use thresholdq::queue::{sample_busy_periods, QueueParams, RateFn, ServiceDist};
use thresholdq::stats::{Ecdf, HistogramSpec};

use analysis::{analyze_returns, create, write_summary};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(version, about = "Threshold-agent markets and their queueing limits")]
struct Cli {
    /// TOML experiment file; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; falls back to THRESHOLDQ_OUT, then ./out.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Set one config key, e.g. --override market.num_agents=1000.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the agent market and write daily series plus diagnostics.
    Simulate,
    /// Sample instantaneous price cascades over a threshold landscape.
    Cascade,
    /// Sample queue busy periods by discrete-event simulation.
    QueueSim,
    /// Closed-form busy-period quantities.
    QueueAnalytic {
        #[command(subcommand)]
        which: AnalyticCommand,
    },
    /// Recompute return diagnostics for an existing series.
    Analyze {
        /// CSV whose last column is the series; comments and header skipped.
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum AnalyticCommand {
    /// Tabulate the M/M/1 busy-period density, CDF, and moments.
    Tabulate,
    /// Check the analytic CDF against a fresh simulation.
    Compare,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let config = config::load(
        cli.config.as_deref(),
        &cli.overrides,
        cli.seed,
        cli.out.as_deref(),
    )?;
    let out = config
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("THRESHOLDQ_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    match &cli.command {
        Command::Simulate => cmd_simulate(&config, &out)?,
        Command::Cascade => cmd_cascade(&config, &out)?,
        Command::QueueSim => cmd_queue_sim(&config, &out)?,
        Command::QueueAnalytic {
            which: AnalyticCommand::Tabulate,
        } => cmd_tabulate(&config, &out)?,
        Command::QueueAnalytic {
            which: AnalyticCommand::Compare,
        } => cmd_compare(&config, &out)?,
        Command::Analyze { input } => cmd_analyze(&config, &out, input)?,
    }
    println!("wrote outputs to {}", out.display());
    Ok(())
}

fn write_manifest(
    out: &Path,
    config: &ExperimentConfig,
    subcommand: &str,
    seed: u64,
) -> Result<()> {
    let text = config::manifest(config, subcommand, seed)?;
    std::fs::write(out.join("manifest.toml"), text).context("writing manifest")?;
    Ok(())
}

fn side_spec(state: &MarketState, side: Side, bins: usize) -> Result<HistogramSpec> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in &state.agents {
        let v = match side {
            Side::Lower => a.lower,
            Side::Upper => a.upper,
        };
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        bail!("threshold values are not finite");
    }
    if hi <= lo {
        hi = lo + lo.abs().max(1.0) * 1e-9;
    }
    Ok(HistogramSpec::new(lo, hi, bins)?)
}

fn cmd_simulate(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let mut params = config.market.params.clone();
    if let Some(s) = config.seed {
        params.rng_seed = s;
    }
    let run = market::run(&params, config.market.days)?;

    let mut w = create(out, "price.csv")?;
    write_header(&mut w, "price", &["day", "price"])?;
    for d in &run.days {
        writeln!(w, "{},{}", d.day, fmt_f64(d.price))?;
    }
    w.flush()?;

    let mut w = create(out, "returns.csv")?;
    write_header(&mut w, "returns", &["day", "log_return"])?;
    for d in &run.days {
        writeln!(w, "{},{}", d.day, fmt_f64(d.log_return))?;
    }
    w.flush()?;

    let mut w = create(out, "sentiment.csv")?;
    write_header(&mut w, "sentiment", &["day", "sentiment", "num_switches"])?;
    for d in &run.days {
        writeln!(
            w,
            "{},{},{}",
            d.day,
            fmt_f64(d.sentiment),
            d.num_switches
        )?;
    }
    w.flush()?;

    let state = &run.final_state;
    let mut w = create(out, "thresholds_hist.csv")?;
    write_header(
        &mut w,
        "thresholds_hist",
        &["side", "state", "bin_lo", "bin_hi", "count"],
    )?;
    for (side, label) in [(Side::Lower, "lower"), (Side::Upper, "upper")] {
        let spec = side_spec(state, side, config.analysis.hist_bins)?;
        for (agent_state, hist) in market::threshold_density(state, side, true, spec) {
            for (i, &count) in hist.counts.iter().enumerate() {
                let (lo, hi) = hist.bin_edges(i);
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    label,
                    agent_state,
                    fmt_f64(lo),
                    fmt_f64(hi),
                    count
                )?;
            }
        }
    }
    w.flush()?;

    let returns = run.returns();
    let extra = [
        ("days", run.days.len().to_string()),
        ("num_agents", params.num_agents.to_string()),
        ("final_price", fmt_f64(state.price)),
        ("final_sentiment", fmt_f64(state.sentiment)),
        (
            "total_switches",
            run.days
                .iter()
                .map(|d| d.num_switches)
                .sum::<u64>()
                .to_string(),
        ),
    ];
    analyze_returns(
        out,
        &config.analysis,
        &returns.daily_log_returns,
        &extra,
    )?;
    write_manifest(out, config, "simulate", params.rng_seed)
}

fn cmd_cascade(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let block = &config.cascade;
    let field = block.to_field()?;
    let seed = config.seed.unwrap_or(0);
    let sample = sample_cascades(
        &field,
        block.initiator_weight,
        block.n_samples,
        seed,
        block.max_switches,
    )?;

    let mut w = create(out, "outcomes.csv")?;
    write_header(&mut w, "outcomes", &["drop", "switches", "bounce"])?;
    for ((drop, switches), bounce) in sample
        .drops
        .iter()
        .zip(&sample.num_switches)
        .zip(&sample.bounces)
    {
        writeln!(w, "{},{},{}", fmt_f64(*drop), switches, fmt_f64(*bounce))?;
    }
    w.flush()?;

    let n = sample.drops.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let rows = [
        ("n_cascades", n.to_string()),
        ("truncated_count", sample.truncated_count.to_string()),
        ("jump_scale", fmt_f64(field.jump_scale())),
        ("mean_drop", fmt_f64(mean(&sample.drops))),
        (
            "mean_switches",
            fmt_f64(sample.num_switches.iter().sum::<u64>() as f64 / n as f64),
        ),
        ("mean_bounce", fmt_f64(mean(&sample.bounces))),
        (
            "max_drop",
            fmt_f64(sample.drops.iter().fold(f64::NAN, |a, &b| a.max(b))),
        ),
    ];
    write_summary(out, &rows)?;
    write_manifest(out, config, "cascade", seed)
}

fn cmd_queue_sim(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let block = &config.queue;
    let seed = config.seed.unwrap_or(0);
    let sample = sample_busy_periods(&block.params, block.n_samples, seed, block.max_duration)?;

    let mut w = create(out, "samples.csv")?;
    write_header(&mut w, "samples", &["duration", "served", "reneged"])?;
    for ((d, s), r) in sample
        .durations
        .iter()
        .zip(&sample.customers_served)
        .zip(&sample.customers_reneged)
    {
        writeln!(w, "{},{},{}", fmt_f64(*d), s, r)?;
    }
    w.flush()?;

    let n = sample.durations.len();
    let moment = |k: i32| {
        sample
            .durations
            .iter()
            .map(|d| d.powi(k))
            .sum::<f64>()
            / n as f64
    };
    let count_mean =
        |v: &[u64]| fmt_f64(v.iter().sum::<u64>() as f64 / n as f64);
    let rows = [
        ("n_busy_periods", n.to_string()),
        ("truncated_count", sample.truncated_count.to_string()),
        (
            "utilization",
            fmt_f64(block.params.utilization().unwrap_or(f64::NAN)),
        ),
        ("mean_duration", fmt_f64(moment(1))),
        ("duration_moment2", fmt_f64(moment(2))),
        ("duration_moment3", fmt_f64(moment(3))),
        ("duration_moment4", fmt_f64(moment(4))),
        ("mean_served", count_mean(&sample.customers_served)),
        ("mean_reneged", count_mean(&sample.customers_reneged)),
        (
            "mean_work_served",
            fmt_f64(sample.work_served.iter().sum::<f64>() / n as f64),
        ),
    ];
    write_summary(out, &rows)?;
    write_manifest(out, config, "queue-sim", seed)
}

fn time_grid(t_max: f64, t_step: f64) -> Result<Vec<f64>> {
    if !(t_step > 0.0 && t_step.is_finite() && t_max >= t_step && t_max.is_finite()) {
        bail!("analytic block needs 0 < t_step <= t_max, got t_step={t_step}, t_max={t_max}");
    }
    let steps = (t_max / t_step).round() as usize;
    if steps > 2_000_000 {
        bail!("analytic grid has {steps} points; coarsen t_step");
    }
    Ok((1..=steps).map(|k| k as f64 * t_step).collect())
}

fn cmd_tabulate(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let a = &config.analytic;
    let grid = time_grid(a.t_max, a.t_step)?;
    let tail = match &a.tail {
        Some(tb) => Some((TailSpec::new(tb.alpha, tb.slowly_varying_constant)?, tb.rho)),
        None => None,
    };

    let mut w = create(out, "density.csv")?;
    write_header(
        &mut w,
        "density",
        &["t", "density", "cdf", "tail_prediction"],
    )?;
    for &t in &grid {
        let density = busy_density_mm1(t, a.lambda, a.mu)?;
        let cdf = busy_cdf_mm1(t, a.lambda, a.mu, 1e-10)?;
        let tail_col = match &tail {
            Some((spec, rho)) => fmt_f64(tail_prediction(t, *rho, spec)?),
            None => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(t),
            fmt_f64(density),
            fmt_f64(cdf),
            tail_col
        )?;
    }
    w.flush()?;

    let mut w = create(out, "moments.csv")?;
    write_header(&mut w, "moments", &["moment_order", "value"])?;
    for k in 1..=4u32 {
        writeln!(
            w,
            "{},{}",
            k,
            fmt_f64(busy_moment_mm1(k, a.lambda, a.mu, 1e-10)?)
        )?;
    }
    w.flush()?;
    write_manifest(out, config, "queue-analytic tabulate", config.seed.unwrap_or(0))
}

fn cmd_compare(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let a = &config.analytic;
    let grid = time_grid(a.t_max, a.t_step)?;
    let seed = config.seed.unwrap_or(0);
    let params = QueueParams {
        arrival: RateFn::Constant(a.lambda),
        service: ServiceDist::Exponential { mu: a.mu },
        reneging: None,
    };
    let sample = sample_busy_periods(&params, a.n_samples, seed, None)?;
    let ecdf = Ecdf::new(&sample.durations);

    let mut sup = 0.0f64;
    let mut w = create(out, "compare.csv")?;
    write_header(&mut w, "compare", &["t", "analytic_cdf", "empirical_cdf"])?;
    for &t in &grid {
        let analytic = busy_cdf_mm1(t, a.lambda, a.mu, 1e-10)?;
        let empirical = ecdf.eval(t);
        sup = sup.max((analytic - empirical).abs());
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(t),
            fmt_f64(analytic),
            fmt_f64(empirical)
        )?;
    }
    w.flush()?;

    let rows = [
        ("n_samples", sample.durations.len().to_string()),
        ("lambda", fmt_f64(a.lambda)),
        ("mu", fmt_f64(a.mu)),
        ("sup_distance", fmt_f64(sup)),
    ];
    write_summary(out, &rows)?;
    write_manifest(out, config, "queue-analytic compare", seed)
}

fn cmd_analyze(config: &ExperimentConfig, out: &Path, input: &Path) -> Result<()> {
    let file =
        File::open(input).with_context(|| format!("opening series {}", input.display()))?;
    let series = csvio::read_series(BufReader::new(file))
        .with_context(|| format!("reading series {}", input.display()))?;
    analyze_returns(out, &config.analysis, &series, &[])?;
    write_manifest(out, config, "analyze", config.seed.unwrap_or(0))
}
