use super::{CovarianceSpec, Field};

/// Pairs of cells whose separation falls within `lag ± tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemivariogramBin {
    pub lag: f64,
    pub tolerance: f64,
    pub pairs: usize,
    pub semivariance: f64,
    /// `(d_row, d_col, pair count)` for every grid offset in the bin.
    pub offsets: Vec<(i64, i64, usize)>,
}

impl SemivariogramBin {
    /// Model semivariance averaged over the same pairs as the estimate.
    pub fn model_average(&self, spec: &CovarianceSpec) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(dr, dc, count) in &self.offsets {
            let h = ((dr * dr + dc * dc) as f64).sqrt();
            num += count as f64 * spec.semivariance(h);
            den += count as f64;
        }
        num / den
    }
}

/// Method-of-moments semivariogram `gamma(h) = mean (f(p) - f(p + d))^2 / 2`
/// over all grid offsets `d` with `| |d| - lag | <= tolerance`.
pub fn empirical_semivariogram(field: &Field, lags: &[f64], tolerance: f64) -> Vec<SemivariogramBin> {
    let (rows, cols) = (field.rows as i64, field.cols as i64);
    lags.iter()
        .map(|&lag| {
            let reach = (lag + tolerance).floor() as i64;
            let mut offsets = Vec::new();
            let mut total = 0.0;
            let mut pairs = 0usize;
            // Half plane: each unordered pair once.
            for dr in 0..=reach {
                for dc in -reach..=reach {
                    if dr == 0 && dc <= 0 {
                        continue;
                    }
                    let h = ((dr * dr + dc * dc) as f64).sqrt();
                    if (h - lag).abs() > tolerance || dr >= rows || dc.abs() >= cols {
                        continue;
                    }
                    let c0 = (-dc).max(0);
                    let c1 = cols - dc.max(0);
                    let mut sum = 0.0;
                    for r in 0..rows - dr {
                        let a = &field.values[(r * cols) as usize..((r + 1) * cols) as usize];
                        let b = &field.values[((r + dr) * cols) as usize..((r + dr + 1) * cols) as usize];
                        for c in c0..c1 {
                            let d = a[c as usize] - b[(c + dc) as usize];
                            sum += d * d;
                        }
                    }
                    let count = ((rows - dr) * (c1 - c0)) as usize;
                    total += sum;
                    pairs += count;
                    offsets.push((dr, dc, count));
                }
            }
            SemivariogramBin {
                lag,
                tolerance,
                pairs,
                semivariance: if pairs > 0 { 0.5 * total / pairs as f64 } else { f64::NAN },
                offsets,
            }
        })
        .collect()
}
