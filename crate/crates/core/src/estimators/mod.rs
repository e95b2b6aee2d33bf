//! Design-based and model-assisted estimators of a population mean under
//! simple random sampling.
//!
//! * [`hte`]: the sample mean with its textbook variance estimate.
//! * [`sre`]: the simple regression estimator, which corrects the sample
//!   mean using a covariate whose population mean is known.
//!
//! Variance estimates for the regression estimator come in two flavors,
//! [`sre_variance_naive`] and [`sre_variance_gweight`]. Confidence intervals
//! are built by [`confidence_interval`].

mod interval;
mod regression;

pub use interval::{confidence_interval, ConfidenceInterval};
pub use regression::{ols_fit, sre, sre_point, sre_variance_gweight, sre_variance_naive, RegressionFit};

use crate::error::{Error, Result};
use crate::stats;

/// Which estimator produced an [`Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Horvitz-Thompson (sample mean under SRS).
    Hte,
    /// Simple regression estimator.
    Sre,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Hte => "HTE",
            Method::Sre => "SRE",
        }
    }

    /// Observations needed before a variance can be estimated.
    pub fn min_sample(self) -> usize {
        match self {
            Method::Hte => 2,
            Method::Sre => 3,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// How the sampling variance in an [`Estimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarianceMethod {
    /// `S^2(z) / n` for the sample mean.
    SampleMean,
    /// Residual variance over `n`, residual divisor `n - 2`.
    Naive,
    /// g-weighted residual variance.
    GWeight,
}

/// A point estimate with its estimated sampling variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub method: Method,
    pub point: f64,
    pub variance: f64,
    pub variance_method: VarianceMethod,
    pub n: usize,
    /// Degrees of freedom for the t multiplier of the interval.
    pub df: usize,
}

impl Estimate {
    pub fn std_error(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Interval at significance level `alpha` using the estimate's own df.
    pub fn interval(&self, alpha: f64) -> Result<ConfidenceInterval> {
        confidence_interval(self.point, self.variance, self.df as f64, alpha)
    }
}

pub(crate) fn require_len(len: usize, needed: usize) -> Result<()> {
    if len < needed {
        return Err(Error::InsufficientSample { needed, got: len });
    }
    Ok(())
}

/// Horvitz-Thompson estimate of the mean from an SRS of `z` values.
pub fn hte(z: &[f64]) -> Result<Estimate> {
    let n = z.len();
    require_len(n, Method::Hte.min_sample())?;
    let point = stats::mean(z);
    let s2 = stats::sum_sq_dev(z, point) / (n - 1) as f64;
    Ok(Estimate {
        method: Method::Hte,
        point,
        variance: s2 / n as f64,
        variance_method: VarianceMethod::SampleMean,
        n,
        df: n - 1,
    })
}
