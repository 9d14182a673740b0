//! End-to-end checks of the binary: file contracts, determinism, exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn out_dir(test: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("thresholdq-cli-tests")
        .join(test);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thresholdq"))
        .args(args)
        .output()
        .expect("spawning the binary")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Data rows of a CSV, skipping the comment line and the header.
fn rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
        .lines()
        .skip(2)
        .map(str::to_string)
        .collect()
}

fn summary_value(dir: &Path, metric: &str) -> f64 {
    for row in rows(&dir.join("summary.csv")) {
        let (m, v) = row.split_once(',').expect("metric,value");
        if m == metric {
            return v.parse().unwrap_or_else(|e| panic!("parsing {metric}={v}: {e}"));
        }
    }
    panic!("metric {metric} not in {}", dir.display());
}

#[test]
fn simulate_writes_the_full_table_set() {
    let dir = out_dir("simulate-tables");
    let d = dir.to_str().unwrap();
    run_ok(&[
        "simulate",
        "--seed",
        "1",
        "--out",
        d,
        "--override",
        "market.num_agents=200",
        "--override",
        "market.days=300",
    ]);

    assert_eq!(rows(&dir.join("price.csv")).len(), 300);
    assert_eq!(rows(&dir.join("returns.csv")).len(), 300);
    assert_eq!(rows(&dir.join("sentiment.csv")).len(), 300);
    // 2 sides x 2 states x 20 bins.
    assert_eq!(rows(&dir.join("thresholds_hist.csv")).len(), 80);
    assert_eq!(rows(&dir.join("acf.csv")).len(), 50);
    assert_eq!(summary_value(&dir, "n_returns"), 300.0);

    let head = std::fs::read_to_string(dir.join("price.csv")).unwrap();
    assert!(head.starts_with("# thresholdq price v1\nday,price\n"));
    let manifest = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("subcommand = \"simulate\""));
    assert!(manifest.contains("seed = 1"));
    assert!(manifest.contains("config_sha256 = "));
}

#[test]
fn decoupled_constant_volatility_run_is_mesokurtic() {
    let dir = out_dir("mesokurtic");
    run_ok(&[
        "simulate",
        "--seed",
        "5",
        "--out",
        dir.to_str().unwrap(),
        "--override",
        "market.num_agents=150",
        "--override",
        "market.days=6000",
        "--override",
        "market.coupling=0.0",
        "--override",
        "market.volatility_fn={kind=\"constant_one\"}",
    ]);
    let kurt = summary_value(&dir, "excess_kurtosis");
    assert!(kurt.abs() < 0.25, "excess kurtosis {kurt} is not Gaussian-like");
    let within = summary_value(&dir, "acf_return_within_band");
    assert!(within >= 45.0, "only {within} of 50 ACF lags inside the band");
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let a = out_dir("identical-a");
    let b = out_dir("identical-b");
    for dir in [&a, &b] {
        run_ok(&[
            "cascade",
            "--seed",
            "9",
            "--out",
            dir.to_str().unwrap(),
            "--override",
            "cascade.n_samples=2000",
        ]);
    }
    for name in ["outcomes.csv", "summary.csv", "manifest.toml"] {
        let bytes_a = std::fs::read(a.join(name)).unwrap();
        let bytes_b = std::fs::read(b.join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs between identical runs");
    }
}

#[test]
fn single_threshold_cascade_is_exact() {
    let dir = out_dir("one-threshold");
    run_ok(&[
        "cascade",
        "--out",
        dir.to_str().unwrap(),
        "--override",
        "cascade.entries=[{position=0.5, state=1, weight=1.0}]",
        "--override",
        "cascade.n_samples=3",
    ]);
    // Jump scale 2k/W = 1: the initiator commits 1, sweeps the entry at
    // 0.5, and its switch doubles the drop. Deterministic, no generator.
    for row in rows(&dir.join("outcomes.csv")) {
        assert_eq!(row, "2,2,0");
    }
}

#[test]
fn tabulated_cdf_converges_and_moments_match() {
    let dir = out_dir("tabulate");
    run_ok(&[
        "queue-analytic",
        "tabulate",
        "--out",
        dir.to_str().unwrap(),
        "--override",
        "analytic.t_max=60.0",
        "--override",
        "analytic.t_step=0.5",
    ]);
    let density = rows(&dir.join("density.csv"));
    assert_eq!(density.len(), 120);
    let last_cdf: f64 = density
        .last()
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(last_cdf > 0.999 && last_cdf <= 1.0 + 1e-9, "cdf(60) = {last_cdf}");

    let moments: Vec<f64> = rows(&dir.join("moments.csv"))
        .iter()
        .map(|r| r.split_once(',').unwrap().1.parse().unwrap())
        .collect();
    assert!((moments[0] - 2.0).abs() < 1e-8);
    assert!((moments[3] - 8448.0).abs() < 1e-6 * 8448.0);
}

#[test]
fn compare_tracks_the_analytic_cdf() {
    let dir = out_dir("compare");
    run_ok(&[
        "queue-analytic",
        "compare",
        "--seed",
        "3",
        "--out",
        dir.to_str().unwrap(),
        "--override",
        "analytic.n_samples=20000",
        "--override",
        "analytic.t_step=0.1",
    ]);
    let sup = summary_value(&dir, "sup_distance");
    assert!(sup < 0.02, "sup distance {sup} too large for 20k samples");
}

#[test]
fn analyze_reproduces_simulate_diagnostics() {
    let sim = out_dir("analyze-src");
    run_ok(&[
        "simulate",
        "--seed",
        "4",
        "--out",
        sim.to_str().unwrap(),
        "--override",
        "market.num_agents=200",
        "--override",
        "market.days=400",
    ]);
    let ana = out_dir("analyze-dst");
    let returns = sim.join("returns.csv");
    run_ok(&[
        "analyze",
        returns.to_str().unwrap(),
        "--out",
        ana.to_str().unwrap(),
    ]);
    for name in ["acf.csv", "hill.csv"] {
        let a = std::fs::read(sim.join(name)).unwrap();
        let b = std::fs::read(ana.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between simulate and analyze");
    }
    assert_eq!(summary_value(&ana, "n_returns"), 400.0);
}

#[test]
fn config_errors_exit_nonzero_with_line_info() {
    let dir = out_dir("errors");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "market.days = [unclosed\n").unwrap();
    let out = run(&["simulate", "--config", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "no line info in: {stderr}");

    let out = run(&["simulate", "--override", "nonsense=1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    let out = run(&["simulate", "--override", "market.num_agents=0", "--out", dir.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_agents"));
}
