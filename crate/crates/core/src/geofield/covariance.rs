use crate::error::{Error, Result};

/// Isotropic spherical covariance model.
///
/// ```text
/// C(h) = sill * (1 - 1.5 h/a + 0.5 (h/a)^3)   for 0 < h < a
///      = 0                                     for h >= a
/// C(0) = sill + nugget
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceSpec {
    pub sill: f64,
    pub range: f64,
    pub nugget: f64,
}

impl CovarianceSpec {
    /// A nugget-free spherical model.
    pub fn spherical(sill: f64, range: f64) -> Result<Self> {
        let spec = CovarianceSpec { sill, range, nugget: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sill >= 0.0) || !self.sill.is_finite() {
            return Err(Error::InvalidArgument(format!("sill must be >= 0, got {}", self.sill)));
        }
        if !(self.range > 0.0) || !self.range.is_finite() {
            return Err(Error::InvalidArgument(format!("range must be > 0, got {}", self.range)));
        }
        if self.nugget != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "only nugget-free models are supported, got nugget {}",
                self.nugget
            )));
        }
        Ok(())
    }

    /// Covariance at lag `h` without argument checks.
    #[inline]
    pub(crate) fn eval(&self, h: f64) -> f64 {
        if h == 0.0 {
            return self.sill + self.nugget;
        }
        if h >= self.range {
            return 0.0;
        }
        let r = h / self.range;
        self.sill * (1.0 - 1.5 * r + 0.5 * r * r * r)
    }

    /// Semivariance `gamma(h) = C(0) - C(h)`.
    pub fn semivariance(&self, h: f64) -> f64 {
        self.eval(0.0) - self.eval(h)
    }
}

/// Spherical covariance at distance `h`.
pub fn spherical_cov(h: f64, spec: &CovarianceSpec) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::InvalidArgument(format!("distance must be >= 0, got {h}")));
    }
    spec.validate()?;
    Ok(spec.eval(h))
}
