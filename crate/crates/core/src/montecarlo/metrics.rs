use crate::error::{Error, Result};
use crate::stats;
use crate::tdist;

use super::ReplicateRecord;

/// One-sample two-sided t-test of the Monte Carlo bias against zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasTest {
    pub bias: f64,
    /// Standard deviation of the estimates (divisor `M - 1`).
    pub sd: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom, `M - 1`.
    pub df: usize,
}

impl BiasTest {
    pub fn std_error(&self) -> f64 {
        self.sd / ((self.df + 1) as f64).sqrt()
    }

    pub fn is_significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }

    /// Half-width of the acceptance region of the test at level `alpha`.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        Ok(tdist::t_quantile(1.0 - 0.5 * alpha, self.df as f64)? * self.std_error())
    }
}

/// Empirical bias `mean(estimate - mu)` with its t-test.
pub fn empirical_bias(estimates: &[f64], mu: f64) -> Result<BiasTest> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::InsufficientReplicates { needed: 2, got: m });
    }
    let errors: Vec<f64> = estimates.iter().map(|e| e - mu).collect();
    let bias = stats::mean(&errors);
    let sd = stats::sample_variance(&errors).sqrt();
    let se = sd / (m as f64).sqrt();
    let df = m - 1;
    let (t_statistic, p_value) = if se > 0.0 {
        let t = bias / se;
        (t, tdist::t_two_sided_p(t, df as f64)?)
    } else if bias == 0.0 {
        (0.0, 1.0)
    } else {
        (bias.signum() * f64::INFINITY, 0.0)
    };
    Ok(BiasTest { bias, sd, t_statistic, p_value, df })
}

/// Fraction of intervals covering the true mean and its binomial standard error.
pub fn empirical_coverage(records: &[ReplicateRecord]) -> Result<(f64, f64)> {
    let m = records.len();
    if m == 0 {
        return Err(Error::InvalidArgument("no replicate records".into()));
    }
    let covered = records.iter().filter(|r| r.covered).count();
    let p = covered as f64 / m as f64;
    Ok((p, (p * (1.0 - p) / m as f64).sqrt()))
}

/// Monte Carlo sampling variance of a set of estimates (divisor `M - 1`).
pub fn mc_variance(estimates: &[f64]) -> Result<f64> {
    if estimates.len() < 2 {
        return Err(Error::InsufficientReplicates { needed: 2, got: estimates.len() });
    }
    Ok(stats::sample_variance(estimates))
}

/// Ratio of Monte Carlo variances, regression estimator over sample mean.
pub fn precision_gain(sre_estimates: &[f64], hte_estimates: &[f64]) -> Result<f64> {
    if sre_estimates.len() != hte_estimates.len() {
        return Err(Error::InvalidArgument(format!(
            "paired estimate arrays differ in length ({} vs {})",
            sre_estimates.len(),
            hte_estimates.len()
        )));
    }
    let hte = mc_variance(hte_estimates)?;
    if !(hte > 0.0) {
        return Err(Error::DegenerateInput("Monte Carlo variance of the reference estimator is zero".into()));
    }
    Ok(mc_variance(sre_estimates)? / hte)
}
