use crate::error::{Error, Result};
use crate::tdist::t_quantile;

/// Two-sided confidence interval `point ± t_{1-alpha/2, df} * sqrt(variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

pub fn confidence_interval(point: f64, variance: f64, df: f64, alpha: f64) -> Result<ConfidenceInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(df >= 1.0) {
        return Err(Error::InvalidArgument(format!("degrees of freedom must be >= 1, got {df}")));
    }
    if !(variance >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance must be non-negative, got {variance}")));
    }
    let half = t_quantile(1.0 - 0.5 * alpha, df)? * variance.sqrt();
    Ok(ConfidenceInterval { lower: point - half, upper: point + half, alpha })
}
