use super::{require_len, Estimate, Method, VarianceMethod};
use crate::error::{Error, Result};
use crate::stats;

/// Ordinary least squares fit of `z` on a single covariate `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub intercept: f64,
    pub slope: f64,
    /// `e_k = z_k - (intercept + slope * x_k)`.
    pub residuals: Vec<f64>,
    pub xbar_sample: f64,
    pub zbar_sample: f64,
    /// `sum (x_k - xbar_sample)^2`.
    pub sxx: f64,
}

impl RegressionFit {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }
}

/// Fits `z = a + b x` by ordinary least squares.
pub fn ols_fit(x: &[f64], z: &[f64]) -> Result<RegressionFit> {
    if x.len() != z.len() {
        return Err(Error::InvalidArgument(format!(
            "covariate and response lengths differ ({} vs {})",
            x.len(),
            z.len()
        )));
    }
    require_len(x.len(), Method::Sre.min_sample())?;
    let xbar = stats::mean(x);
    let zbar = stats::mean(z);
    let sxx = stats::sum_sq_dev(x, xbar);
    // Relative test so that covariates on any scale are treated alike.
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sxx <= (f64::EPSILON * scale).powi(2) * x.len() as f64 {
        return Err(Error::DegenerateCovariate);
    }
    let sxz = stats::sum_cross_dev(x, xbar, z, zbar);
    let slope = sxz / sxx;
    let intercept = zbar - slope * xbar;
    let residuals = x.iter().zip(z).map(|(xk, zk)| zk - (intercept + slope * xk)).collect();
    Ok(RegressionFit { intercept, slope, residuals, xbar_sample: xbar, zbar_sample: zbar, sxx })
}

/// Regression-corrected mean: `zbar_S + b (xbar - xbar_S)`.
pub fn sre_point(fit: &RegressionFit, xbar_pop: f64) -> f64 {
    fit.zbar_sample + fit.slope * (xbar_pop - fit.xbar_sample)
}

/// Same quantity written as model prediction plus mean residual.
fn sre_point_decomposed(fit: &RegressionFit, xbar_pop: f64) -> f64 {
    fit.intercept + fit.slope * xbar_pop + stats::mean(&fit.residuals)
}

/// Simple regression estimate of the population mean of `z`.
///
/// `variance` picks the sampling-variance estimator stored in the result;
/// [`VarianceMethod::SampleMean`] is rejected because it ignores the fit.
pub fn sre(x: &[f64], z: &[f64], xbar_pop: f64, variance: VarianceMethod) -> Result<Estimate> {
    let fit = ols_fit(x, z)?;
    let point = sre_point(&fit, xbar_pop);
    debug_assert!({
        let alt = sre_point_decomposed(&fit, xbar_pop);
        let scale = 1.0
            + point.abs()
            + (fit.slope * (xbar_pop - fit.xbar_sample)).abs()
            + (fit.slope * xbar_pop).abs()
            + fit.intercept.abs();
        (alt - point).abs() <= 1e-9 * scale
    });
    let var = match variance {
        VarianceMethod::Naive => sre_variance_naive(&fit)?,
        VarianceMethod::GWeight => sre_variance_gweight(x, &fit, xbar_pop)?,
        VarianceMethod::SampleMean => {
            return Err(Error::InvalidArgument(
                "the regression estimator needs a residual-based variance method".into(),
            ))
        }
    };
    let n = fit.n();
    Ok(Estimate { method: Method::Sre, point, variance: var, variance_method: variance, n, df: n - 2 })
}

/// `S^2(e) / n`, where `S^2(e)` divides the residual sum of squares by `n - 2`.
pub fn sre_variance_naive(fit: &RegressionFit) -> Result<f64> {
    let n = fit.n();
    require_len(n, 3)?;
    let sse = stats::sum(fit.residuals.iter().map(|e| e * e));
    Ok(sse / (n - 2) as f64 / n as f64)
}

/// g-weight variance estimator for the regression estimator.
///
/// ```text
/// g_k  = 1 + (xbar - xbar_S)(x_k - xbar_S) / s2_x,   s2_x = sum (x_j - xbar_S)^2 / n
/// V    = sum (g_k e_k - mean(g e))^2 / (n (n - 1))
/// ```
pub fn sre_variance_gweight(x: &[f64], fit: &RegressionFit, xbar_pop: f64) -> Result<f64> {
    let n = fit.n();
    if x.len() != n {
        return Err(Error::InvalidArgument(format!("covariate length {} does not match fit size {n}", x.len())));
    }
    require_len(n, 3)?;
    if !(fit.sxx > 0.0) {
        return Err(Error::DegenerateCovariate);
    }
    let s2x = fit.sxx / n as f64;
    let shift = (xbar_pop - fit.xbar_sample) / s2x;
    let ge: Vec<f64> =
        x.iter().zip(&fit.residuals).map(|(xk, ek)| (1.0 + shift * (xk - fit.xbar_sample)) * ek).collect();
    let center = stats::mean(&ge);
    let ss = stats::sum_sq_dev(&ge, center);
    Ok(ss / (n as f64 * (n - 1) as f64))
}
