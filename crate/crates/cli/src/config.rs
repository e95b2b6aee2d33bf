//! Run configuration: command-line flags, an optional `key = value` file and
//! the `MRV_LAB_SEED` environment fallback.
//!
//! Precedence, highest first: flag, config file, `MRV_LAB_SEED` (seed only),
//! built-in default. The defaults reproduce the full 198-scenario grid at the
//! desk replicate count.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use mrv_lab::estimators::VarianceMethod;
use mrv_lab::montecarlo::{EstimatorKind, GridConfig, GridGeometry, HarnessOptions, IntervalQuantile};

use crate::CliError;

/// Master seed used when neither a flag, the config file nor `MRV_LAB_SEED` sets one.
pub const DEFAULT_SEED: u64 = 20251015;

/// Name of the environment variable consulted for the master seed.
pub const SEED_ENV: &str = "MRV_LAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "mrv-lab", version = crate::VERSION, about = "Monte Carlo comparison of the sample mean and the simple regression estimator on simulated soil carbon fields")]
struct Flags {
    /// Key = value file with run settings; flags override its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Population variances, comma separated.
    #[arg(long, value_name = "LIST")]
    variances: Option<String>,
    /// Sample sizes, comma separated.
    #[arg(long = "n", value_name = "LIST")]
    n: Option<String>,
    /// Covariate r2 values, comma separated: 0 is the decorrelated covariate.
    #[arg(long, value_name = "LIST")]
    r2: Option<String>,
    /// Monte Carlo replicates per scenario.
    #[arg(long = "M", value_name = "COUNT")]
    m: Option<String>,
    /// Master seed.
    #[arg(long, value_name = "INT")]
    seed: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    #[arg(long = "grid-rows", value_name = "INT")]
    grid_rows: Option<String>,
    #[arg(long = "grid-cols", value_name = "INT")]
    grid_cols: Option<String>,
    /// Spherical range of the covariate field, in cells.
    #[arg(long = "range-x", value_name = "CELLS")]
    range_x: Option<String>,
    /// Spherical range of the residual field, in cells.
    #[arg(long = "range-delta", value_name = "CELLS")]
    range_delta: Option<String>,
    /// Full-scale replicate count (10000 instead of 2000).
    #[arg(long)]
    full: bool,
    /// Estimator rows to write: HTE, SRE-uncorr, SRE-corr, comma separated.
    #[arg(long, value_name = "LIST")]
    estimators: Option<String>,
    /// Interval quantile: `normal` or `t`.
    #[arg(long, value_name = "KIND")]
    interval: Option<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long, value_name = "INT")]
    threads: Option<String>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variances: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub r2_values: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    /// Where the master seed came from: `flag`, `file`, `env` or `default`.
    pub seed_source: &'static str,
    pub output_dir: PathBuf,
    pub geometry: GridGeometry,
    pub quantile: IntervalQuantile,
    /// Estimator rows written to the output files.
    pub estimators: Vec<EstimatorKind>,
    /// `None` lets rayon pick.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variances: GridConfig::STANDARD_VARIANCES.to_vec(),
            sample_sizes: GridConfig::STANDARD_SAMPLE_SIZES.to_vec(),
            r2_values: GridConfig::STANDARD_R2.to_vec(),
            replicates: GridConfig::DESK_REPLICATES,
            master_seed: DEFAULT_SEED,
            seed_source: "default",
            output_dir: PathBuf::from("mrv-lab-out"),
            geometry: GridGeometry::default(),
            quantile: IntervalQuantile::default(),
            estimators: ALL_KINDS.to_vec(),
            threads: None,
        }
    }
}

const ALL_KINDS: [EstimatorKind; 3] =
    [EstimatorKind::Hte, EstimatorKind::SreUncorrelated, EstimatorKind::SreCorrelated];

impl RunConfig {
    /// The grid handed to the Monte Carlo harness.
    pub fn grid(&self) -> GridConfig {
        GridConfig {
            variances: self.variances.clone(),
            sample_sizes: self.sample_sizes.clone(),
            r2_values: self.r2_values.clone(),
            replicates: self.replicates,
            master_seed: self.master_seed,
            geometry: self.geometry,
            target_mean: 1.0,
            options: HarnessOptions {
                quantile: self.quantile,
                sre_variance: VarianceMethod::GWeight,
                ..HarnessOptions::default()
            },
        }
    }
}

/// Keys accepted in a config file, with `-` and `_` interchangeable.
const FILE_KEYS: [&str; 14] = [
    "variances",
    "n",
    "r2",
    "M",
    "seed",
    "out",
    "grid_rows",
    "grid_cols",
    "range_x",
    "range_delta",
    "full",
    "estimators",
    "interval",
    "threads",
];

/// Parses `key = value` lines. Blank lines and `#` comments are ignored;
/// a key may appear only once.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`, got `{}`", i + 1, raw.trim())))?;
        let key = normalize_key(key.trim());
        if !FILE_KEYS.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key `{}`", i + 1, key)));
        }
        if entries.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: duplicate key `{}`", i + 1, key)));
        }
    }
    Ok(entries)
}

fn normalize_key(key: &str) -> String {
    match key {
        "m" | "M" | "replicates" => "M".to_string(),
        "sample_sizes" => "n".to_string(),
        "master_seed" => "seed".to_string(),
        _ => key.replace('-', "_"),
    }
}

/// Resolves a run configuration from command-line arguments (including the
/// program name) and the value of `MRV_LAB_SEED`, if set.
///
/// `Ok(None)` means help or version output was requested and printed.
pub fn parse_config<I, T>(args: I, env_seed: Option<&str>) -> Result<Option<RunConfig>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = match Flags::try_parse_from(args) {
        Ok(f) => f,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    Ok(None)
                }
                _ => Err(usage(e.to_string().trim_end().to_string())),
            };
        }
    };
    let file = match &flags.config {
        Some(path) => parse_config_text(&read_config(path)?)?,
        None => BTreeMap::new(),
    };
    resolve(&flags, &file, env_seed).map(Some)
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))
}

fn resolve(flags: &Flags, file: &BTreeMap<String, String>, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
    let pick = |flag: &Option<String>, key: &str| -> Option<(String, &'static str)> {
        flag.clone().map(|v| (v, "flag")).or_else(|| file.get(key).map(|v| (v.clone(), "file")))
    };
    let mut cfg = RunConfig::default();

    if let Some((v, _)) = pick(&flags.variances, "variances") {
        cfg.variances = parse_list(&v, "variances", parse_f64)?;
    }
    if let Some((v, _)) = pick(&flags.n, "n") {
        cfg.sample_sizes = parse_list(&v, "n", parse_usize)?;
    }
    if let Some((v, _)) = pick(&flags.r2, "r2") {
        cfg.r2_values = parse_list(&v, "r2", parse_f64)?;
    }
    if let Some((v, _)) = pick(&flags.out, "out") {
        if v.is_empty() {
            return Err(usage("out: empty path".into()));
        }
        cfg.output_dir = PathBuf::from(v);
    }
    if let Some((v, _)) = pick(&flags.grid_rows, "grid_rows") {
        cfg.geometry.rows = parse_usize(&v, "grid_rows")?;
    }
    if let Some((v, _)) = pick(&flags.grid_cols, "grid_cols") {
        cfg.geometry.cols = parse_usize(&v, "grid_cols")?;
    }
    if let Some((v, _)) = pick(&flags.range_x, "range_x") {
        cfg.geometry.range_x = parse_f64(&v, "range_x")?;
    }
    if let Some((v, _)) = pick(&flags.range_delta, "range_delta") {
        cfg.geometry.range_delta = parse_f64(&v, "range_delta")?;
    }
    if let Some((v, _)) = pick(&flags.estimators, "estimators") {
        cfg.estimators = parse_list(&v, "estimators", parse_kind)?;
    }
    if let Some((v, _)) = pick(&flags.interval, "interval") {
        cfg.quantile = match v.to_ascii_lowercase().as_str() {
            "normal" | "z" => IntervalQuantile::Normal,
            "t" | "student" => IntervalQuantile::StudentT,
            _ => return Err(usage(format!("interval: expected `normal` or `t`, got `{v}`"))),
        };
    }
    if let Some((v, _)) = pick(&flags.threads, "threads") {
        let t = parse_usize(&v, "threads")?;
        if t == 0 {
            return Err(usage("threads must be >= 1".into()));
        }
        cfg.threads = Some(t);
    }

    match pick(&flags.seed, "seed") {
        Some((v, source)) => {
            cfg.master_seed = parse_u64(&v, "seed")?;
            cfg.seed_source = source;
        }
        None => {
            if let Some(v) = env_seed {
                cfg.master_seed = parse_u64(v, SEED_ENV)?;
                cfg.seed_source = "env";
            }
        }
    }

    let full = if flags.full {
        true
    } else {
        match file.get("full") {
            Some(v) => parse_bool(v, "full")?,
            None => false,
        }
    };
    let explicit_m = match pick(&flags.m, "M") {
        Some((v, source)) => Some((parse_usize(&v, "M")?, source)),
        None => None,
    };
    cfg.replicates = match (full, explicit_m) {
        (true, Some((m, source))) if m != GridConfig::FULL_REPLICATES => {
            return Err(usage(format!(
                "conflicting settings: full run requests M = {} but M = {m} was given ({source})",
                GridConfig::FULL_REPLICATES
            )))
        }
        (true, _) => GridConfig::FULL_REPLICATES,
        (false, Some((m, _))) => m,
        (false, None) => GridConfig::DESK_REPLICATES,
    };
    if cfg.replicates == 0 {
        return Err(usage("M must be >= 1".into()));
    }
    if cfg.variances.is_empty() || cfg.sample_sizes.is_empty() || cfg.r2_values.is_empty() || cfg.estimators.is_empty()
    {
        return Err(usage("variances, n, r2 and estimators must be non-empty".into()));
    }
    cfg.grid().validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn parse_list<T>(text: &str, what: &str, item: fn(&str, &str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    text.split(',').map(|s| item(s.trim(), what)).collect()
}

fn parse_f64(text: &str, what: &str) -> Result<f64, CliError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(usage(format!("{what}: `{text}` is not a finite number"))),
    }
}

fn parse_usize(text: &str, what: &str) -> Result<usize, CliError> {
    text.parse().map_err(|_| usage(format!("{what}: `{text}` is not a non-negative integer")))
}

fn parse_u64(text: &str, what: &str) -> Result<u64, CliError> {
    text.trim().parse().map_err(|_| usage(format!("{what}: `{text}` is not an unsigned 64-bit integer")))
}

fn parse_bool(text: &str, what: &str) -> Result<bool, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(usage(format!("{what}: `{text}` is not a boolean"))),
    }
}

fn parse_kind(text: &str, what: &str) -> Result<EstimatorKind, CliError> {
    ALL_KINDS
        .into_iter()
        .find(|k| k.label().eq_ignore_ascii_case(text))
        .ok_or_else(|| usage(format!("{what}: unknown estimator `{text}` (expected HTE, SRE-uncorr or SRE-corr)")))
}
