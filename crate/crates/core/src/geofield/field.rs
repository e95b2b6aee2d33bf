use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::CovarianceSpec;
use crate::error::{Error, Result};
use crate::seed;
use crate::stats;

/// Largest grid (in cells) that [`FieldMethod::Auto`] factorizes densely.
pub const DENSE_MAX_CELLS: usize = 32 * 32;

/// The embedding torus may be at most this many times the grid side.
pub const MAX_EMBEDDING_FACTOR: usize = 8;

/// Minimum grid side accepted by [`generate_field`].
pub const MIN_GRID_SIDE: usize = 8;

/// A real-valued field on a regular unit-spaced grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Field {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Variance over all cells (divisor `N`).
    pub fn spatial_variance(&self) -> f64 {
        stats::population_variance(&self.values)
    }
}

/// Simulation algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldMethod {
    /// Dense for grids up to [`DENSE_MAX_CELLS`], circulant embedding above.
    #[default]
    Auto,
    /// Circulant embedding on a torus, diagonalized by the 2-D FFT.
    Circulant,
    /// Symmetric square root of the full covariance matrix.
    Dense,
}

/// Zero-mean Gaussian random field with spherical covariance `spec`.
///
/// Deterministic for a given `seed`.
pub fn generate_field(spec: &CovarianceSpec, rows: usize, cols: usize, seed: u64) -> Result<Field> {
    generate_field_with(spec, rows, cols, seed, FieldMethod::Auto)
}

pub fn generate_field_with(
    spec: &CovarianceSpec,
    rows: usize,
    cols: usize,
    seed: u64,
    method: FieldMethod,
) -> Result<Field> {
    spec.validate()?;
    if rows < MIN_GRID_SIDE || cols < MIN_GRID_SIDE {
        return Err(Error::InvalidArgument(format!(
            "grid must be at least {MIN_GRID_SIDE}x{MIN_GRID_SIDE}, got {rows}x{cols}"
        )));
    }
    if spec.sill == 0.0 {
        return Ok(Field { rows, cols, values: vec![0.0; rows * cols] });
    }
    let method = match method {
        FieldMethod::Auto if rows * cols <= DENSE_MAX_CELLS => FieldMethod::Dense,
        FieldMethod::Auto => FieldMethod::Circulant,
        m => m,
    };
    let values = match method {
        FieldMethod::Dense => dense(spec, rows, cols, seed),
        _ => CirculantEmbedding::new(spec, rows, cols)?.sample(seed),
    };
    Ok(Field { rows, cols, values })
}

fn dense(spec: &CovarianceSpec, rows: usize, cols: usize, seed: u64) -> Vec<f64> {
    let n = rows * cols;
    let cov = DMatrix::from_fn(n, n, |i, j| {
        let dr = (i / cols) as f64 - (j / cols) as f64;
        let dc = (i % cols) as f64 - (j % cols) as f64;
        spec.eval((dr * dr + dc * dc).sqrt())
    });
    let eig = SymmetricEigen::new(cov);
    let scales = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&scales) * eig.eigenvectors.transpose();
    let mut rng = seed::rng(seed);
    let noise = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    (root * noise).iter().copied().collect()
}

/// Smallest `m >= n` whose only prime factors are 2, 3 and 5.
fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Side of the torus for one axis: wide enough that every in-grid lag is
/// represented without wrap-around error and that the covariance support fits
/// in half the torus, which keeps the circulant eigenvalues non-negative.
fn embedding_side(n: usize, range: f64) -> usize {
    let r = range.ceil() as usize;
    smooth_size((n + r).max(2 * r))
}

struct CirculantEmbedding {
    rows: usize,
    cols: usize,
    m_rows: usize,
    m_cols: usize,
    /// `sqrt(lambda / M)` per torus frequency.
    scale: Vec<f64>,
    fft_rows: Arc<dyn Fft<f64>>,
    fft_cols: Arc<dyn Fft<f64>>,
}

impl CirculantEmbedding {
    fn new(spec: &CovarianceSpec, rows: usize, cols: usize) -> Result<Self> {
        let limit = |n: usize| n * MAX_EMBEDDING_FACTOR;
        if spec.range > (limit(rows.max(cols)) / 2) as f64
            || embedding_side(rows, spec.range) > limit(rows)
            || embedding_side(cols, spec.range) > limit(cols)
        {
            return Err(Error::Configuration(format!(
                "grid {rows}x{cols} is too small for circulant embedding of range {}: the torus \
                 would exceed {MAX_EMBEDDING_FACTOR}x the grid side; use a larger grid, a shorter \
                 range, or the dense method",
                spec.range
            )));
        }
        let m_rows = embedding_side(rows, spec.range);
        let m_cols = embedding_side(cols, spec.range);
        let mut planner = FftPlanner::<f64>::new();
        let fft_rows = planner.plan_fft_forward(m_cols);
        let fft_cols = planner.plan_fft_forward(m_rows);
        let mut base: Vec<Complex64> = (0..m_rows * m_cols)
            .map(|k| {
                let (i, j) = (k / m_cols, k % m_cols);
                let di = i.min(m_rows - i) as f64;
                let dj = j.min(m_cols - j) as f64;
                Complex64::new(spec.eval((di * di + dj * dj).sqrt()), 0.0)
            })
            .collect();
        let mut emb = CirculantEmbedding { rows, cols, m_rows, m_cols, scale: Vec::new(), fft_rows, fft_cols };
        emb.fft2(&mut base);
        let max = base.iter().fold(0.0_f64, |m, c| m.max(c.re));
        let min = base.iter().fold(f64::INFINITY, |m, c| m.min(c.re));
        if min < -1e-8 * max {
            return Err(Error::Configuration(format!(
                "circulant embedding of a {m_rows}x{m_cols} torus is not non-negative definite \
                 (min eigenvalue {min:.3e}, max {max:.3e})"
            )));
        }
        let total = (m_rows * m_cols) as f64;
        emb.scale = base.iter().map(|c| (c.re.max(0.0) / total).sqrt()).collect();
        Ok(emb)
    }

    fn fft2(&self, data: &mut [Complex64]) {
        let (mr, mc) = (self.m_rows, self.m_cols);
        self.fft_rows.process(data);
        let mut t = vec![Complex64::default(); mr * mc];
        transpose(data, &mut t, mr, mc);
        self.fft_cols.process(&mut t);
        transpose(&t, data, mc, mr);
    }

    fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = seed::rng(seed);
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|s| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft2(&mut buf);
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            out.extend(buf[r * self.m_cols..r * self.m_cols + self.cols].iter().map(|c| c.re));
        }
        out
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}
