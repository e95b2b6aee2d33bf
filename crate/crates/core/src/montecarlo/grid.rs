use rayon::prelude::*;

use super::metrics::{empirical_bias, empirical_coverage, mc_variance, precision_gain};
use super::{population_seed, run_paired, EstimatorKind, HarnessOptions, ReplicateRecord};
use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::geofield::{build_population, Population, PopulationSpec};
use crate::stats;

/// Grid size and covariance ranges of the simulated populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub rows: usize,
    pub cols: usize,
    pub range_x: f64,
    pub range_delta: f64,
}

impl Default for GridGeometry {
    fn default() -> Self {
        GridGeometry { rows: 512, cols: 512, range_x: 40.0, range_delta: 15.0 }
    }
}

/// A full scenario grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub variances: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    /// Covariate settings: `0` is the decorrelated covariate, a positive value
    /// the correlated covariate with that population r2. At most one positive
    /// value is allowed since each variance level has a single population.
    /// An empty list evaluates the sample mean alone.
    pub r2_values: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub geometry: GridGeometry,
    pub target_mean: f64,
    pub options: HarnessOptions,
}

impl GridConfig {
    pub const STANDARD_VARIANCES: [f64; 6] = [100.0, 500.0, 900.0, 1300.0, 1700.0, 2100.0];
    pub const STANDARD_SAMPLE_SIZES: [usize; 11] = [5, 10, 20, 40, 80, 160, 320, 640, 1280, 2560, 5120];
    pub const STANDARD_R2: [f64; 2] = [0.0, 0.3];
    pub const DESK_REPLICATES: usize = 2000;
    pub const FULL_REPLICATES: usize = 10_000;
    /// r2 used for the population when no correlated covariate is requested.
    pub const DEFAULT_POPULATION_R2: f64 = 0.3;

    /// The 198-scenario grid at `replicates` replicates.
    pub fn standard(replicates: usize, master_seed: u64) -> Self {
        GridConfig {
            variances: Self::STANDARD_VARIANCES.to_vec(),
            sample_sizes: Self::STANDARD_SAMPLE_SIZES.to_vec(),
            r2_values: Self::STANDARD_R2.to_vec(),
            replicates,
            master_seed,
            geometry: GridGeometry::default(),
            target_mean: 1.0,
            options: HarnessOptions::default(),
        }
    }

    /// r2 of the correlated covariate, also used to build the populations.
    pub fn population_r2(&self) -> f64 {
        self.r2_values.iter().copied().find(|r| *r > 0.0).unwrap_or(Self::DEFAULT_POPULATION_R2)
    }

    /// Estimator kinds evaluated per `(variance, n)`, in output order.
    pub fn kinds(&self) -> Vec<EstimatorKind> {
        let mut kinds = vec![EstimatorKind::Hte];
        if self.r2_values.contains(&0.0) {
            kinds.push(EstimatorKind::SreUncorrelated);
        }
        if self.r2_values.iter().any(|r| *r > 0.0) {
            kinds.push(EstimatorKind::SreCorrelated);
        }
        kinds
    }

    pub fn scenario_count(&self) -> usize {
        self.variances.len() * self.sample_sizes.len() * self.kinds().len()
    }

    pub fn population_spec(&self, variance: f64) -> Result<PopulationSpec> {
        let g = &self.geometry;
        let r2 = self.population_r2();
        PopulationSpec::new(
            g.rows,
            g.cols,
            variance,
            r2,
            self.target_mean,
            g.range_x,
            g.range_delta,
            population_seed(self.master_seed, variance, r2),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.variances.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::Configuration("variances and sample sizes must be non-empty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Configuration("replicates must be >= 1".into()));
        }
        if let Some(v) = self.variances.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Configuration(format!("population variance must be positive, got {v}")));
        }
        if let Some(r) = self.r2_values.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::Configuration(format!("r2 values must lie in [0, 1), got {r}")));
        }
        let mut positive: Vec<f64> = self.r2_values.iter().copied().filter(|r| *r > 0.0).collect();
        positive.dedup();
        if positive.len() > 1 {
            return Err(Error::Configuration(format!("at most one positive r2 value is supported, got {positive:?}")));
        }
        let needed = self.kinds().iter().map(|k| k.method().min_sample()).max().unwrap_or(2);
        if let Some(n) = self.sample_sizes.iter().find(|n| **n < needed) {
            return Err(Error::Configuration(format!("sample sizes must be >= {needed}, got {n}")));
        }
        let n_max = *self.sample_sizes.iter().max().unwrap_or(&0);
        for &v in &self.variances {
            self.population_spec(v)?.check_sample_size(n_max)?;
        }
        self.options.validate()
    }
}

/// Identifies one scenario row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioKey {
    pub population_variance: f64,
    /// r2 label as printed: `0` for HTE and the decorrelated covariate.
    pub r2: f64,
    pub sample_size: usize,
    pub estimator: Method,
    pub kind: EstimatorKind,
}

/// Monte Carlo summary of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioMetrics {
    pub key: ScenarioKey,
    pub replicates: usize,
    pub mu: f64,
    pub empirical_bias: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    /// Half-width of the bias test's acceptance region, `t_{1-alpha/2, M-1} s / sqrt(M)`.
    pub bias_critical_value: f64,
    pub coverage: f64,
    pub coverage_mc_se: f64,
    pub mc_sampling_variance: f64,
    /// Average of the per-replicate variance estimates.
    pub mean_variance_estimate: f64,
    /// Regression rows only: MC variance ratio against the paired HTE estimates.
    pub precision_gain: Option<f64>,
}

/// A scenario that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFailure {
    pub key: ScenarioKey,
    pub error: Error,
}

/// Realized statistics of a population used by the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSummary {
    pub population_variance: f64,
    pub mu: f64,
    pub var_z: f64,
    pub r2_realized: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridReport {
    pub metrics: Vec<ScenarioMetrics>,
    pub failures: Vec<ScenarioFailure>,
    pub populations: Vec<PopulationSummary>,
}

fn summarize(
    key: ScenarioKey,
    records: &[ReplicateRecord],
    hte: &[f64],
    mu: f64,
    alpha: f64,
) -> Result<ScenarioMetrics> {
    let estimates: Vec<f64> = records.iter().map(|r| r.estimate).collect();
    let bias = empirical_bias(&estimates, mu)?;
    let (coverage, coverage_mc_se) = empirical_coverage(records)?;
    let precision_gain = match key.estimator {
        Method::Sre => Some(precision_gain(&estimates, hte)?),
        Method::Hte => None,
    };
    Ok(ScenarioMetrics {
        key,
        replicates: records.len(),
        mu,
        empirical_bias: bias.bias,
        t_statistic: bias.t_statistic,
        p_value: bias.p_value,
        significant: bias.is_significant(alpha),
        bias_critical_value: bias.critical_value(alpha)?,
        coverage,
        coverage_mc_se,
        mc_sampling_variance: mc_variance(&estimates)?,
        mean_variance_estimate: stats::mean(&records.iter().map(|r| r.variance_estimate).collect::<Vec<_>>()),
        precision_gain,
    })
}

fn keys_for(config: &GridConfig, variance: f64, n: usize) -> Vec<ScenarioKey> {
    let r2 = config.population_r2();
    config
        .kinds()
        .into_iter()
        .map(|kind| ScenarioKey {
            population_variance: variance,
            r2: if kind == EstimatorKind::SreCorrelated { r2 } else { 0.0 },
            sample_size: n,
            estimator: kind.method(),
            kind,
        })
        .collect()
}

type CellOutcome = Vec<std::result::Result<ScenarioMetrics, ScenarioFailure>>;

fn run_cell(config: &GridConfig, pop: &Population, variance: f64, n: usize) -> CellOutcome {
    let keys = keys_for(config, variance, n);
    let kinds: Vec<EstimatorKind> = keys.iter().map(|k| k.kind).collect();
    let fail_all = |e: Error| keys.iter().map(|&key| Err(ScenarioFailure { key, error: e.clone() })).collect();
    let records = match run_paired(pop, variance, n, config.replicates, config.master_seed, &kinds, &config.options) {
        Ok(r) => r,
        Err(e) => return fail_all(e),
    };
    let hte: Vec<f64> = records[0].iter().map(|r| r.estimate).collect();
    keys.iter()
        .zip(&records)
        .map(|(&key, recs)| {
            summarize(key, recs, &hte, pop.mu, config.options.alpha).map_err(|error| ScenarioFailure { key, error })
        })
        .collect()
}

/// Runs the whole grid.
///
/// Rows come out ordered by variance, then sample size, then estimator
/// (HTE, SRE with the decorrelated covariate, SRE with the correlated one).
/// A scenario that fails is reported in [`GridReport::failures`] and the
/// others still run. Configuration errors abort before any work is done.
pub fn run_grid(config: &GridConfig) -> Result<GridReport> {
    config.validate()?;
    let per_variance: Vec<(Option<PopulationSummary>, Vec<CellOutcome>)> = config
        .variances
        .par_iter()
        .map(|&variance| {
            let built = config.population_spec(variance).and_then(|s| build_population(&s));
            match built {
                Ok(pop) => {
                    let cells = config.sample_sizes.par_iter().map(|&n| run_cell(config, &pop, variance, n)).collect();
                    let summary = PopulationSummary {
                        population_variance: variance,
                        mu: pop.mu,
                        var_z: pop.var_z,
                        r2_realized: pop.r2_realized,
                        seed: pop.spec.seed,
                    };
                    (Some(summary), cells)
                }
                Err(e) => {
                    let cells = config
                        .sample_sizes
                        .iter()
                        .map(|&n| {
                            keys_for(config, variance, n)
                                .into_iter()
                                .map(|key| Err(ScenarioFailure { key, error: e.clone() }))
                                .collect()
                        })
                        .collect();
                    (None, cells)
                }
            }
        })
        .collect();

    let mut report = GridReport::default();
    for (summary, cells) in per_variance {
        report.populations.extend(summary);
        for outcome in cells.into_iter().flatten() {
            match outcome {
                Ok(m) => report.metrics.push(m),
                Err(f) => report.failures.push(f),
            }
        }
    }
    Ok(report)
}
