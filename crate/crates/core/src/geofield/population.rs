use rand_distr::{Distribution, Normal};

use super::{generate_field, CovarianceSpec};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats;

/// The population must hold at least this many cells per sampled cell.
pub const MIN_CELLS_PER_SAMPLE: usize = 50;

const TAG_X: u64 = 1;
const TAG_DELTA: u64 = 2;
const TAG_UNCORR: u64 = 3;

/// Recipe for a synthetic population `z = x + delta + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSpec {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub target_var_z: f64,
    /// Target squared correlation between `x` and `z`, in `[0, 1)`.
    pub target_r2: f64,
    pub target_mean: f64,
    pub cov_x: CovarianceSpec,
    pub cov_delta: CovarianceSpec,
    pub seed: u64,
}

impl PopulationSpec {
    /// Splits `target_var_z` into the two sills according to `target_r2`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid_rows: usize,
        grid_cols: usize,
        target_var_z: f64,
        target_r2: f64,
        target_mean: f64,
        range_x: f64,
        range_delta: f64,
        seed: u64,
    ) -> Result<Self> {
        let spec = PopulationSpec {
            grid_rows,
            grid_cols,
            target_var_z,
            target_r2,
            target_mean,
            cov_x: CovarianceSpec { sill: target_r2 * target_var_z, range: range_x, nugget: 0.0 },
            cov_delta: CovarianceSpec { sill: (1.0 - target_r2) * target_var_z, range: range_delta, nugget: 0.0 },
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cells(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_var_z > 0.0) || !self.target_var_z.is_finite() {
            return Err(Error::InvalidArgument(format!("target variance must be positive, got {}", self.target_var_z)));
        }
        if !(0.0..1.0).contains(&self.target_r2) {
            return Err(Error::InvalidArgument(format!("target r2 must lie in [0, 1), got {}", self.target_r2)));
        }
        if !self.target_mean.is_finite() {
            return Err(Error::InvalidArgument("target mean must be finite".into()));
        }
        self.cov_x.validate()?;
        self.cov_delta.validate()?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * self.target_var_z;
        if !close(self.cov_x.sill, self.target_r2 * self.target_var_z)
            || !close(self.cov_delta.sill, (1.0 - self.target_r2) * self.target_var_z)
        {
            return Err(Error::InvalidArgument(format!(
                "sills ({}, {}) do not split the target variance {} at r2 = {}",
                self.cov_x.sill, self.cov_delta.sill, self.target_var_z, self.target_r2
            )));
        }
        Ok(())
    }

    /// Checks the sampling-fraction floor for samples up to `n_max`.
    pub fn check_sample_size(&self, n_max: usize) -> Result<()> {
        if self.cells() < MIN_CELLS_PER_SAMPLE * n_max {
            return Err(Error::Configuration(format!(
                "a {}x{} population ({} cells) is too small for n = {n_max}: need at least {} \
                 cells so the sampling fraction stays at or below {}%",
                self.grid_rows,
                self.grid_cols,
                self.cells(),
                MIN_CELLS_PER_SAMPLE * n_max,
                100 / MIN_CELLS_PER_SAMPLE
            )));
        }
        Ok(())
    }
}

/// A calibrated synthetic population. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub spec: PopulationSpec,
    /// Target variable, row-major.
    pub z: Vec<f64>,
    /// Correlated covariate.
    pub x: Vec<f64>,
    /// Unexplained component, `z - x - shift`.
    pub delta: Vec<f64>,
    /// Covariate with zero population correlation to `z`.
    pub x_uncorr: Vec<f64>,
    pub mu: f64,
    pub xbar_pop: f64,
    pub xbar_uncorr_pop: f64,
    pub var_z: f64,
    pub var_x: f64,
    pub var_delta: f64,
    pub r2_realized: f64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.spec.grid_rows
    }

    pub fn cols(&self) -> usize {
        self.spec.grid_cols
    }
}

fn center(values: &mut [f64]) {
    let m = stats::mean(values);
    values.iter_mut().for_each(|v| *v -= m);
}

fn rescale(values: &mut [f64], target_var: f64) -> Result<()> {
    let v = stats::population_variance(values);
    if !(v > 0.0) {
        return Err(Error::DegenerateInput("cannot rescale a constant field".into()));
    }
    let s = (target_var / v).sqrt();
    values.iter_mut().for_each(|x| *x *= s);
    Ok(())
}

/// Removes the least-squares projection of `values` on the centered vector `basis`.
fn project_out(values: &mut [f64], basis: &[f64], basis_ss: f64) {
    // Two passes: the second mops up the rounding left by the first.
    for _ in 0..2 {
        let beta = stats::sum(values.iter().zip(basis).map(|(v, b)| v * b)) / basis_ss;
        values.iter_mut().zip(basis).for_each(|(v, b)| *v -= beta * b);
    }
}

/// Builds and calibrates a population.
///
/// The raw fields are centered, the residual field is orthogonalized against
/// the covariate, both are rescaled to their exact target variances and the
/// sum is shifted to the target mean, so the recorded statistics hit their
/// targets up to rounding.
pub fn build_population(spec: &PopulationSpec) -> Result<Population> {
    spec.validate()?;
    let (rows, cols) = (spec.grid_rows, spec.grid_cols);
    let mut x = generate_field(&spec.cov_x, rows, cols, seed::derive(spec.seed, &[TAG_X]))?.values;
    let mut delta = generate_field(&spec.cov_delta, rows, cols, seed::derive(spec.seed, &[TAG_DELTA]))?.values;

    center(&mut delta);
    if spec.cov_x.sill > 0.0 {
        center(&mut x);
        let xx = stats::sum_sq_dev(&x, 0.0);
        if !(xx > 0.0) {
            return Err(Error::DegenerateInput("covariate field is constant".into()));
        }
        project_out(&mut delta, &x, xx);
        rescale(&mut x, spec.cov_x.sill)?;
    }
    rescale(&mut delta, spec.cov_delta.sill)?;

    let z: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b + spec.target_mean).collect();

    let mut rng = seed::rng(seed::derive(spec.seed, &[TAG_UNCORR]));
    let normal = Normal::new(0.0, spec.target_var_z.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let raw: Vec<f64> = (0..z.len()).map(|_| normal.sample(&mut rng)).collect();
    let x_uncorr = decorrelate(&raw, &z)?;

    let var_z = stats::population_variance(&z);
    let var_x = stats::population_variance(&x);
    let r2_realized = if var_x > 0.0 {
        let r = stats::correlation(&x, &z);
        r * r
    } else {
        0.0
    };
    Ok(Population {
        spec: *spec,
        mu: stats::mean(&z),
        xbar_pop: stats::mean(&x),
        xbar_uncorr_pop: stats::mean(&x_uncorr),
        var_z,
        var_x,
        var_delta: stats::population_variance(&delta),
        r2_realized,
        z,
        x,
        delta,
        x_uncorr,
    })
}

/// Makes `x_raw` exactly uncorrelated with `z` over the whole array.
///
/// The ordinary least-squares projection of `x_raw` on `z` is removed, then
/// the residual is rescaled to the variance of `x_raw` and shifted back to
/// its mean.
pub fn decorrelate(x_raw: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    if x_raw.len() != z.len() {
        return Err(Error::InvalidArgument(format!("array lengths differ ({} vs {})", x_raw.len(), z.len())));
    }
    if z.len() < 3 {
        return Err(Error::InsufficientSample { needed: 3, got: z.len() });
    }
    let zbar = stats::mean(z);
    let zc: Vec<f64> = z.iter().map(|v| v - zbar).collect();
    let zz = stats::sum_sq_dev(&zc, 0.0);
    let z_scale = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(zz > (f64::EPSILON * z_scale).powi(2) * z.len() as f64) {
        return Err(Error::DegenerateInput("target array is constant".into()));
    }

    let x_mean = stats::mean(x_raw);
    let target_var = stats::population_variance(x_raw);
    let mut r: Vec<f64> = x_raw.iter().map(|v| v - x_mean).collect();
    project_out(&mut r, &zc, zz);
    center(&mut r);
    let vr = stats::population_variance(&r);
    if !(vr > 1e-24 * target_var.max(f64::MIN_POSITIVE)) || !(target_var > 0.0) {
        return Err(Error::DegenerateInput(
            "covariate is an affine function of the target; nothing is left after decorrelation".into(),
        ));
    }
    let s = (target_var / vr).sqrt();
    Ok(r.into_iter().map(|v| v * s + x_mean).collect())
}
