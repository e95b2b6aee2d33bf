//! Student's t distribution: CDF, two-sided p-values and quantiles.
//!
//! Everything reduces to the regularized incomplete beta function
//! `I_x(a, b)`. For `t >= 0` and `nu` degrees of freedom
//!
//! ```text
//! P(T <= t) = 1 - I_{nu / (nu + t^2)}(nu / 2, 1 / 2) / 2
//! ```
//!
//! so the quantile is obtained by inverting `I_x` and mapping `x` back to `t`.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the series in its accurate region.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 20_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`.
pub fn regularized_beta(x: f64, a: f64, b: f64) -> f64 {
    regularized_beta_xy(x, 1.0 - x, a, b)
}

/// `I_x(a, b)` with the complement `y = 1 - x` supplied by the caller, which
/// avoids cancellation when `x` is close to 1.
fn regularized_beta_xy(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(y, b, a) / b
    }
}

/// Inverse of `I_x(a, b)` in `x`: returns `x` with `I_x(a, b) = q`.
///
/// Halley iteration safeguarded by a bisection bracket.
pub fn inverse_regularized_beta(q: f64, a: f64, b: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    let ln_b = ln_beta(a, b);
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;

    // Initial guess following the usual two-regime approximation.
    let mut x = if a >= 1.0 && b >= 1.0 {
        let pp = if q < 0.5 { q } else { 1.0 - q };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if q < 0.5 {
            z = -z;
        }
        let al = (z * z - 3.0) / 6.0;
        let h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        let w = z * (al + h).sqrt() / h
            - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        a / (a + b * (2.0 * w).exp())
    } else {
        let lna = (a / (a + b)).ln();
        let lnb = (b / (a + b)).ln();
        let t = (a * lna).exp() / a;
        let u = (b * lnb).exp() / b;
        let w = t + u;
        if q < t / w {
            (a * w * q).powf(1.0 / a)
        } else {
            1.0 - (b * w * (1.0 - q)).powf(1.0 / b)
        }
    };
    if !(x > 0.0 && x < 1.0) || !x.is_finite() {
        x = 0.5;
    }

    let mut best = (f64::INFINITY, x);
    for _ in 0..200 {
        let f = regularized_beta(x, a, b) - q;
        if f == 0.0 {
            return x;
        }
        if f.abs() < best.0 {
            best = (f.abs(), x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b;
        let pdf = ln_pdf.exp();
        let mut next = if pdf > 0.0 && pdf.is_finite() {
            let newton = f / pdf;
            let curv = (a - 1.0) / x - (b - 1.0) / (1.0 - x);
            let denom = 1.0 - 0.5 * (newton * curv).clamp(-1.0, 1.0);
            x - newton / denom
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 0.5 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    if (regularized_beta(x, a, b) - q).abs() < best.0 {
        x
    } else {
        best.1
    }
}

fn check_df(df: f64) -> Result<()> {
    if !(df > 0.0) || !df.is_finite() {
        return Err(Error::InvalidArgument(format!("degrees of freedom must be positive and finite, got {df}")));
    }
    Ok(())
}

/// `P(|T| >= |t|)` without argument checks.
fn t_tail2(t: f64, df: f64) -> f64 {
    let t2 = t * t;
    regularized_beta_xy(df / (df + t2), t2 / (df + t2), 0.5 * df, 0.5)
}

fn t_ln_pdf(t: f64, df: f64) -> f64 {
    ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * std::f64::consts::PI).ln()
        - 0.5 * (df + 1.0) * (t * t / df).ln_1p()
}

/// CDF of Student's t with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if t.is_nan() {
        return Err(Error::InvalidArgument("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let tail = 0.5 * t_tail2(t, df);
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

/// Two-sided p-value `P(|T| >= |t|)`.
pub fn t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if t.is_nan() {
        return Err(Error::InvalidArgument("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    Ok(t_tail2(t, df))
}

/// Quantile (inverse CDF) of Student's t with `df` degrees of freedom;
/// `df = inf` gives the normal quantile.
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    if df == f64::INFINITY {
        return normal_quantile(p);
    }
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("probability must lie in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let upper = p > 0.5;
    let tail2 = if upper { 2.0 * (1.0 - p) } else { 2.0 * p };
    let x = inverse_regularized_beta(tail2, 0.5 * df, 0.5);
    let mut t = (df * (1.0 - x) / x).sqrt();
    // Mapping x back to t loses digits when x is near 1; polish on t directly.
    for _ in 0..3 {
        let resid = 0.5 * (t_tail2(t, df) - tail2);
        let step = resid / t_ln_pdf(t, df).exp();
        if !step.is_finite() {
            break;
        }
        t += step;
        if step.abs() <= 4.0 * f64::EPSILON * t.abs() {
            break;
        }
    }
    Ok(if upper { t } else { -t })
}

/// Regularized upper incomplete gamma `Q(a, x)`.
fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    if x <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Series for P, then complement.
        let mut term = 1.0 / a;
        let mut total = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            total += term;
            if term.abs() < total.abs() * EPS {
                break;
            }
        }
        1.0 - total * ln_front.exp()
    } else {
        // Continued fraction for Q (modified Lentz).
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        ln_front.exp() * h
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    // Phi(x) = erfc(-x / sqrt 2) / 2 and erfc(y) = Q(1/2, y^2) for y >= 0.
    let y = x / std::f64::consts::SQRT_2;
    let tail = 0.5 * regularized_gamma_q(0.5, y * y);
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Standard normal quantile: rational initial guess refined by Halley steps.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("probability must lie in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail so the target probability keeps full precision.
    let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let t = (-2.0 * q.ln()).sqrt();
    let mut x = -(t
        - (2.515517 + 0.802853 * t + 0.010328 * t * t)
            / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t));
    let inv_sqrt_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    for _ in 0..8 {
        let y = x / std::f64::consts::SQRT_2;
        let cdf = 0.5 * regularized_gamma_q(0.5, y * y);
        let pdf = inv_sqrt_2pi * (-0.5 * x * x).exp();
        let e = (cdf - q) / pdf;
        let step = e / (1.0 + 0.5 * x * e);
        x -= step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(sign * -x)
}
