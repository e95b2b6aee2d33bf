//! CSV tables, plot-ready figure data and the run manifest.
//!
//! All numbers are written with a fixed number of decimals and a period
//! separator, so repeated runs with the same seed produce identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mrv_lab::montecarlo::{GridReport, ScenarioMetrics};

use crate::config::RunConfig;
use crate::CliError;

pub const BIAS_TABLE: &str = "bias_table.csv";
pub const BIAS_FIGURE: &str = "bias_figure.csv";
pub const COVERAGE: &str = "coverage.csv";
pub const GAIN: &str = "gain.csv";
pub const MANIFEST: &str = "run_manifest.txt";

/// Nominal coverage of the replicate intervals.
pub const NOMINAL_COVERAGE: f64 = 0.95;

pub const BIAS_TABLE_HEADER: [&str; 8] = [
    "population_variance",
    "r2_score",
    "sample_size",
    "estimator",
    "empirical_bias",
    "t_statistic",
    "p_value",
    "statistically_significant",
];
pub const BIAS_FIGURE_HEADER: [&str; 7] = [
    "population_variance",
    "sample_size",
    "estimator",
    "empirical_bias",
    "critical_lower",
    "critical_upper",
    "statistically_significant",
];
pub const COVERAGE_HEADER: [&str; 6] =
    ["population_variance", "sample_size", "estimator", "coverage", "coverage_mc_se", "nominal"];
pub const GAIN_HEADER: [&str; 6] = [
    "population_variance",
    "sample_size",
    "estimator",
    "precision_gain",
    "mc_sampling_variance",
    "hte_mc_sampling_variance",
];

/// Decimals used per column family; the round-trip tolerance is half a unit
/// in the last printed place.
pub const TABLE_DECIMALS: usize = 3;
pub const P_VALUE_DECIMALS: usize = 4;
pub const FIGURE_DECIMALS: usize = 6;

/// Fixed-point formatting that never prints a negative zero.
pub fn fixed(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Shortest representation that parses back to the same value (`2100`, `0.3`).
fn plain(value: f64) -> String {
    format!("{value}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_csv<const N: usize>(path: &Path, header: [&str; N], rows: Vec<[String; N]>) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes the bias t-test table, one row per scenario, into `dir`.
pub fn emit_bias_table(metrics: &[ScenarioMetrics], dir: &Path) -> Result<PathBuf, CliError> {
    let path = dir.join(BIAS_TABLE);
    let rows = metrics
        .iter()
        .map(|m| {
            [
                plain(m.key.population_variance),
                plain(m.key.r2),
                m.key.sample_size.to_string(),
                m.key.estimator.label().to_string(),
                fixed(m.empirical_bias, TABLE_DECIMALS),
                fixed(m.t_statistic, TABLE_DECIMALS),
                fixed(m.p_value, P_VALUE_DECIMALS),
                if m.significant { "TRUE" } else { "FALSE" }.to_string(),
            ]
        })
        .collect();
    write_csv(&path, BIAS_TABLE_HEADER, rows)?;
    Ok(path)
}

/// Writes the bias, coverage and gain series into `dir`. Only regression
/// rows appear in the gain file; the sample mean is its reference at 1.
pub fn emit_figure_data(metrics: &[ScenarioMetrics], dir: &Path) -> Result<[PathBuf; 3], CliError> {
    let d = FIGURE_DECIMALS;
    let key = |m: &ScenarioMetrics| {
        [plain(m.key.population_variance), m.key.sample_size.to_string(), m.key.kind.label().to_string()]
    };

    let bias_path = dir.join(BIAS_FIGURE);
    let rows = metrics
        .iter()
        .map(|m| {
            let [v, n, e] = key(m);
            [
                v,
                n,
                e,
                fixed(m.empirical_bias, d),
                fixed(-m.bias_critical_value, d),
                fixed(m.bias_critical_value, d),
                if m.significant { "TRUE" } else { "FALSE" }.to_string(),
            ]
        })
        .collect();
    write_csv(&bias_path, BIAS_FIGURE_HEADER, rows)?;

    let coverage_path = dir.join(COVERAGE);
    let rows = metrics
        .iter()
        .map(|m| {
            let [v, n, e] = key(m);
            [v, n, e, fixed(m.coverage, d), fixed(m.coverage_mc_se, d), fixed(NOMINAL_COVERAGE, 2)]
        })
        .collect();
    write_csv(&coverage_path, COVERAGE_HEADER, rows)?;

    let gain_path = dir.join(GAIN);
    let rows = metrics
        .iter()
        .filter_map(|m| {
            let gain = m.precision_gain?;
            let [v, n, e] = key(m);
            Some([v, n, e, fixed(gain, d), fixed(m.mc_sampling_variance, d), fixed(m.mc_sampling_variance / gain, d)])
        })
        .collect();
    write_csv(&gain_path, GAIN_HEADER, rows)?;

    Ok([bias_path, coverage_path, gain_path])
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// The resolved configuration as `key = value` lines, readable by `--config`.
pub fn config_echo(cfg: &RunConfig) -> String {
    let labels: Vec<&str> = cfg.estimators.iter().map(|k| k.label()).collect();
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
    line("variances", join(&cfg.variances));
    line("n", join(&cfg.sample_sizes));
    line("r2", join(&cfg.r2_values));
    line("M", cfg.replicates.to_string());
    line("seed", cfg.master_seed.to_string());
    line("out", cfg.output_dir.display().to_string());
    line("grid_rows", cfg.geometry.rows.to_string());
    line("grid_cols", cfg.geometry.cols.to_string());
    line("range_x", plain(cfg.geometry.range_x));
    line("range_delta", plain(cfg.geometry.range_delta));
    line("estimators", labels.join(","));
    line("interval", cfg.quantile.label().to_string());
    if let Some(t) = cfg.threads {
        line("threads", t.to_string());
    }
    s
}

/// Writes the manifest: provenance as `#` comments followed by the config
/// echo, so the file can be passed back with `--config` to repeat the run.
pub fn emit_manifest(cfg: &RunConfig, report: &GridReport, dir: &Path, elapsed_secs: f64) -> Result<PathBuf, CliError> {
    let path = dir.join(MANIFEST);
    let mut s = String::new();
    s.push_str(&format!("# version: {}\n", crate::VERSION));
    s.push_str(&format!("# seed source: {}\n", cfg.seed_source));
    s.push_str(&format!("# scenarios: {} ok, {} failed\n", report.metrics.len(), report.failures.len()));
    s.push_str(&format!("# elapsed seconds: {elapsed_secs:.1}\n"));
    for p in &report.populations {
        s.push_str(&format!(
            "# population variance {}: seed {}, mu {}, var_z {}, r2 {}\n",
            plain(p.population_variance),
            p.seed,
            p.mu,
            p.var_z,
            p.r2_realized
        ));
    }
    for f in &report.failures {
        s.push_str(&format!(
            "# failed: variance {}, n {}, {}: {}\n",
            plain(f.key.population_variance),
            f.key.sample_size,
            f.key.kind.label(),
            f.error
        ));
    }
    s.push_str(&config_echo(cfg));
    let mut file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    file.write_all(s.as_bytes()).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
