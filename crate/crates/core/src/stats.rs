//! Compensated summation and moment helpers.
//!
//! Every aggregate in the crate goes through these so that reductions over
//! ordered buffers give the same bits regardless of how the buffers were
//! filled.

/// Neumaier-compensated sum.
pub fn sum<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut total = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            carry += (total - t) + v;
        } else {
            carry += (v - t) + total;
        }
        total = t;
    }
    total + carry
}

/// Arithmetic mean. Returns NaN for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    sum(values.iter().copied()) / values.len() as f64
}

/// Sum of squared deviations from `center`.
pub fn sum_sq_dev(values: &[f64], center: f64) -> f64 {
    sum(values.iter().map(|v| {
        let d = v - center;
        d * d
    }))
}

/// Variance with an `n - 1` divisor (two-pass).
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    sum_sq_dev(values, mean(values)) / (n - 1) as f64
}

/// Variance with an `n` divisor, as used for finite-population parameters.
pub fn population_variance(values: &[f64]) -> f64 {
    sum_sq_dev(values, mean(values)) / values.len() as f64
}

/// Cross-product of deviations, `sum (a_k - mean_a)(b_k - mean_b)`.
pub fn sum_cross_dev(a: &[f64], mean_a: f64, b: &[f64], mean_b: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum(a.iter().zip(b).map(|(x, y)| (x - mean_a) * (y - mean_b)))
}

/// Pearson correlation over the full arrays.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let sab = sum_cross_dev(a, ma, b, mb);
    let saa = sum_sq_dev(a, ma);
    let sbb = sum_sq_dev(b, mb);
    sab / (saa.sqrt() * sbb.sqrt())
}
