//! Monte Carlo evaluation of the estimators on synthetic populations.
//!
//! Each replicate draws one simple random sample and applies every requested
//! estimator to that same sample, so precision gains are ratios over a shared
//! sample stream. Replicate seeds are derived from
//! `(master seed, population variance, sample size, replicate index)` and
//! every aggregate is reduced sequentially over replicate order, which makes
//! results independent of the thread count.

mod grid;
mod metrics;

pub use grid::{
    run_grid, GridConfig, GridGeometry, GridReport, PopulationSummary, ScenarioFailure, ScenarioKey, ScenarioMetrics,
};
pub use metrics::{empirical_bias, empirical_coverage, mc_variance, precision_gain, BiasTest};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{self, Method, VarianceMethod};
use crate::geofield::Population;
use crate::sampling::srs_sample;
use crate::seed;
use crate::tdist;

const STREAM_SAMPLES: u64 = 0x5353;
const STREAM_POPULATION: u64 = 0x504f;

/// The three estimator/covariate combinations of the scenario grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Hte,
    /// Regression estimator with the decorrelated covariate.
    SreUncorrelated,
    /// Regression estimator with the correlated covariate.
    SreCorrelated,
}

impl EstimatorKind {
    pub fn method(self) -> Method {
        match self {
            EstimatorKind::Hte => Method::Hte,
            _ => Method::Sre,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Hte => "HTE",
            EstimatorKind::SreUncorrelated => "SRE-uncorr",
            EstimatorKind::SreCorrelated => "SRE-corr",
        }
    }
}

/// Which quantile scales the standard error in the replicate intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntervalQuantile {
    /// Standard normal quantile regardless of `n`.
    #[default]
    Normal,
    /// Student t with `n - 1` (HTE) or `n - 2` (SRE) degrees of freedom.
    StudentT,
}

impl IntervalQuantile {
    pub fn label(self) -> &'static str {
        match self {
            IntervalQuantile::Normal => "normal",
            IntervalQuantile::StudentT => "t",
        }
    }
}

/// Knobs shared by every replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessOptions {
    pub alpha: f64,
    pub sre_variance: VarianceMethod,
    pub quantile: IntervalQuantile,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions { alpha: 0.05, sre_variance: VarianceMethod::GWeight, quantile: IntervalQuantile::Normal }
    }
}

impl HarnessOptions {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.sre_variance == VarianceMethod::SampleMean {
            return Err(Error::InvalidArgument(
                "the regression estimator needs a residual-based variance method".into(),
            ));
        }
        Ok(())
    }

    /// Interval multiplier for `kind` at sample size `n`.
    pub fn multiplier(&self, kind: EstimatorKind, n: usize) -> Result<f64> {
        let p = 1.0 - 0.5 * self.alpha;
        let df = match self.quantile {
            IntervalQuantile::Normal => return tdist::normal_quantile(p),
            IntervalQuantile::StudentT => n.checked_sub(kind.method().min_sample() - 1),
        };
        match df {
            Some(df) if df >= 1 => tdist::t_quantile(p, df as f64),
            _ => Err(Error::InsufficientSample { needed: kind.method().min_sample(), got: n }),
        }
    }
}

/// One cell of the scenario grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub population_variance: f64,
    /// `0` selects the decorrelated covariate, a positive value the correlated one.
    pub r2: f64,
    pub sample_size: usize,
    pub estimator: Method,
    pub replicates: usize,
    pub master_seed: u64,
}

impl ScenarioSpec {
    pub fn kind(&self) -> EstimatorKind {
        match self.estimator {
            Method::Hte => EstimatorKind::Hte,
            Method::Sre if self.r2 > 0.0 => EstimatorKind::SreCorrelated,
            Method::Sre => EstimatorKind::SreUncorrelated,
        }
    }
}

/// Outcome of one estimator on one replicate sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateRecord {
    pub estimate: f64,
    pub variance_estimate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// `ci_lower <= mu <= ci_upper`.
    pub covered: bool,
}

/// Seed of the sample drawn in replicate `m` of the `(variance, n)` stream.
pub fn replicate_seed(master_seed: u64, population_variance: f64, n: usize, m: usize) -> u64 {
    seed::derive(master_seed, &[STREAM_SAMPLES, population_variance.to_bits(), n as u64, m as u64])
}

/// Seed of the population built for a variance level.
pub fn population_seed(master_seed: u64, population_variance: f64, r2: f64) -> u64 {
    seed::derive(master_seed, &[STREAM_POPULATION, population_variance.to_bits(), r2.to_bits()])
}

/// Applies each estimator in `kinds` to one shared sample.
fn replicate(
    pop: &Population,
    n: usize,
    seed: u64,
    kinds: &[(EstimatorKind, f64)],
    opts: &HarnessOptions,
) -> Result<Vec<ReplicateRecord>> {
    let sample = srs_sample(pop, n, seed)?;
    kinds
        .iter()
        .map(|&(kind, mult)| {
            let est = match kind {
                EstimatorKind::Hte => estimators::hte(&sample.z)?,
                EstimatorKind::SreCorrelated => estimators::sre(&sample.x, &sample.z, pop.xbar_pop, opts.sre_variance)?,
                EstimatorKind::SreUncorrelated => {
                    estimators::sre(&sample.x_uncorr, &sample.z, pop.xbar_uncorr_pop, opts.sre_variance)?
                }
            };
            let half = mult * est.variance.sqrt();
            let (lo, hi) = (est.point - half, est.point + half);
            Ok(ReplicateRecord {
                estimate: est.point,
                variance_estimate: est.variance,
                ci_lower: lo,
                ci_upper: hi,
                covered: lo <= pop.mu && pop.mu <= hi,
            })
        })
        .collect()
}

/// Runs every replicate of `(variance, n)` for all `kinds` at once.
///
/// Returns one record vector per kind, each in replicate order.
pub(crate) fn run_paired(
    pop: &Population,
    population_variance: f64,
    n: usize,
    replicates: usize,
    master_seed: u64,
    kinds: &[EstimatorKind],
    opts: &HarnessOptions,
) -> Result<Vec<Vec<ReplicateRecord>>> {
    opts.validate()?;
    if replicates == 0 {
        return Err(Error::InsufficientReplicates { needed: 1, got: 0 });
    }
    pop.spec.check_sample_size(n)?;
    let with_mult = kinds.iter().map(|&k| Ok((k, opts.multiplier(k, n)?))).collect::<Result<Vec<_>>>()?;
    let rows = (0..replicates)
        .into_par_iter()
        .map(|m| replicate(pop, n, replicate_seed(master_seed, population_variance, n, m), &with_mult, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<Vec<ReplicateRecord>> = kinds.iter().map(|_| Vec::with_capacity(replicates)).collect();
    for row in rows {
        for (slot, rec) in out.iter_mut().zip(row) {
            slot.push(rec);
        }
    }
    Ok(out)
}

/// All replicates of a single scenario.
pub fn run_scenario(spec: &ScenarioSpec, pop: &Population, opts: &HarnessOptions) -> Result<Vec<ReplicateRecord>> {
    if (pop.spec.target_var_z - spec.population_variance).abs() > 1e-9 * spec.population_variance {
        return Err(Error::InvalidArgument(format!(
            "population variance {} does not match scenario variance {}",
            pop.spec.target_var_z, spec.population_variance
        )));
    }
    let kind = spec.kind();
    if kind == EstimatorKind::SreCorrelated && (pop.spec.target_r2 - spec.r2).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "population r2 {} does not match scenario r2 {}",
            pop.spec.target_r2, spec.r2
        )));
    }
    let mut out =
        run_paired(pop, spec.population_variance, spec.sample_size, spec.replicates, spec.master_seed, &[kind], opts)?;
    Ok(out.pop().unwrap_or_default())
}
