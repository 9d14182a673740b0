//! Experiment configuration: TOML ingestion, dotted-path overrides, and the
//! reproducibility manifest.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thresholdq::cascade::{FieldGenerator, ThresholdField, WeightDist};
use thresholdq::cascade::FieldEntry;
use thresholdq::csvio;
use thresholdq::market::MarketParams;
use thresholdq::queue::QueueParams;

/// Everything a run needs. Every block defaults to the reference
/// configuration, so an empty file (or none at all) reproduces it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub market: MarketBlock,
    pub cascade: CascadeBlock,
    pub queue: QueueBlock,
    pub analytic: AnalyticBlock,
    pub analysis: AnalysisBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarketBlock {
    #[serde(flatten)]
    pub params: MarketParams,
    pub days: usize,
}

impl Default for MarketBlock {
    fn default() -> Self {
        Self {
            params: MarketParams::default(),
            days: 252,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeBlock {
    pub coupling: f64,
    pub total_weight: f64,
    pub initiator_weight: f64,
    pub n_samples: usize,
    pub max_switches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<FieldEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<FieldGenerator>,
}

impl Default for CascadeBlock {
    fn default() -> Self {
        // Unit jump scale (2 kappa / W = 1), so the default field is the
        // M/D/1-equivalent all-plus Poisson landscape at rho = 0.5.
        Self {
            coupling: 1.0,
            total_weight: 2.0,
            initiator_weight: 1.0,
            n_samples: 100_000,
            max_switches: 1_000_000,
            field_csv: None,
            entries: None,
            generator: None,
        }
    }
}

impl CascadeBlock {
    pub fn to_field(&self) -> Result<ThresholdField> {
        let entries = match (&self.entries, &self.field_csv) {
            (Some(_), Some(_)) => {
                bail!("cascade block: give either entries or field_csv, not both")
            }
            (Some(e), None) => e.clone(),
            (None, Some(path)) => {
                let file = File::open(path)
                    .with_context(|| format!("opening field csv {}", path.display()))?;
                csvio::read_field(BufReader::new(file))
                    .with_context(|| format!("reading field csv {}", path.display()))?
            }
            (None, None) => Vec::new(),
        };
        let generator = if entries.is_empty() && self.generator.is_none() {
            Some(FieldGenerator {
                poisson_rate: 0.5,
                weight_dist: WeightDist::Constant { w: 1.0 },
                anti_fraction: 0.0,
            })
        } else {
            self.generator
        };
        let field = ThresholdField {
            entries,
            coupling: self.coupling,
            total_weight: self.total_weight,
            generator,
        };
        field.validate()?;
        Ok(field)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QueueBlock {
    #[serde(flatten)]
    pub params: QueueParams,
    pub n_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_duration: Option<f64>,
}

impl Default for QueueBlock {
    fn default() -> Self {
        Self {
            params: QueueParams::default(),
            n_samples: 100_000,
            max_duration: None,
        }
    }
}

/// Power-law tail of the busy period, for the prediction column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBlock {
    pub alpha: f64,
    pub slowly_varying_constant: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticBlock {
    pub lambda: f64,
    pub mu: f64,
    pub t_max: f64,
    pub t_step: f64,
    /// Monte Carlo sample count for `queue-analytic compare`.
    pub n_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailBlock>,
}

impl Default for AnalyticBlock {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            mu: 1.0,
            t_max: 20.0,
            t_step: 0.01,
            n_samples: 200_000,
            tail: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisBlock {
    pub max_lag: usize,
    /// Headline Hill order; `n/100` clamped to the valid range if unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hill_k: Option<usize>,
    /// Hill stability grid; a spread of `n`-proportional orders if empty.
    pub hill_grid: Vec<usize>,
    pub hist_bins: usize,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self {
            max_lag: 50,
            hill_k: None,
            hill_grid: Vec::new(),
            hist_bins: 20,
        }
    }
}

/// Reads the config file (if any), applies `--override key=value` pairs,
/// then the `--seed` and `--out` flags.
pub fn load(
    config_path: Option<&Path>,
    overrides: &[String],
    seed_flag: Option<u64>,
    out_flag: Option<&Path>,
) -> Result<ExperimentConfig> {
    let mut table: toml::Table = match config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    for spec in overrides {
        apply_override(&mut table, spec)?;
    }
    let mut config: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .context("interpreting configuration")?;
    if let Some(s) = seed_flag {
        config.seed = Some(s);
    }
    if let Some(o) = out_flag {
        config.out_dir = Some(o.to_path_buf());
    }
    Ok(config)
}

/// Sets one dotted-path key, creating intermediate tables. The value is
/// parsed as a TOML literal, falling back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .with_context(|| format!("--override {spec:?} must look like key=value"))?;
    let segments: Vec<&str> = key.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        bail!("--override {spec:?}: empty path segment");
    }
    let value = parse_toml_literal(raw.trim());
    let mut current = table;
    for seg in &segments[..segments.len() - 1] {
        current = current
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("--override {spec:?}: {seg} is not a table"))?;
    }
    current.insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}

fn parse_toml_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    subcommand: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    config_sha256: String,
}

/// The manifest content: version, subcommand, seed, and a hash of the
/// effective config. The destination directory is excluded from the hash,
/// and nothing volatile enters, so reruns are byte-identical.
pub fn manifest(config: &ExperimentConfig, subcommand: &str, seed: u64) -> Result<String> {
    let mut hashed = config.clone();
    hashed.out_dir = None;
    let canonical = toml::to_string(&hashed).context("serializing effective config")?;
    let hash = Sha256::digest(canonical.as_bytes());
    toml::to_string(&Manifest {
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        seed,
        label: config.label.as_deref(),
        config_sha256: format!("{hash:x}"),
    })
    .context("serializing manifest")
}
