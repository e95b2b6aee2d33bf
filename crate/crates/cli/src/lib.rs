//! Command-line driver: resolves a [`RunConfig`], runs the scenario grid and
//! writes the CSV tables, figure data and run manifest.

use std::path::PathBuf;
use std::time::Instant;

use mrv_lab::montecarlo::{run_grid, GridReport};

pub mod config;
pub mod output;

pub use config::{parse_config, RunConfig};

/// Package version plus `git describe` of the build tree.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("MRV_LAB_GIT_DESCRIBE"), ")");

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    /// Bad flags or config file; exit code 2.
    #[error("usage error: {0}")]
    Usage(String),
    /// Failed file output; exit code 1.
    #[error("I/O error: {0}")]
    Io(String),
    /// The simulation itself failed; exit code 1.
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Run(_) => 1,
        }
    }
}

/// What a completed run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: GridReport,
    pub files: Vec<PathBuf>,
    pub elapsed_secs: f64,
}

/// Runs the grid and writes every output file. Rows for estimators not
/// selected in `cfg.estimators` are left out of the files. Scenario failures
/// are listed in the manifest; the caller decides the exit code.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let report = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Run(e.to_string()))?
            .install(|| run_grid(&cfg.grid())),
        None => run_grid(&cfg.grid()),
    }
    .map_err(|e| CliError::Run(e.to_string()))?;
    let elapsed_secs = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::Io(format!("{}: {e}", cfg.output_dir.display())))?;
    let selected: Vec<_> = report.metrics.iter().copied().filter(|m| cfg.estimators.contains(&m.key.kind)).collect();
    let mut files = vec![output::emit_bias_table(&selected, &cfg.output_dir)?];
    files.extend(output::emit_figure_data(&selected, &cfg.output_dir)?);
    files.push(output::emit_manifest(cfg, &report, &cfg.output_dir, elapsed_secs)?);
    Ok(RunOutcome { report, files, elapsed_secs })
}
