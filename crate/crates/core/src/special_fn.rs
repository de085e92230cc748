//! Scalar special functions used by the channel formulas.
//!
//! `erfcx` is the workhorse: truncated-Gaussian evidences and moments are all
//! expressed through ratios of `erfcx` values, so it has to keep full relative
//! precision over the whole real line instead of overflowing or underflowing
//! the way `exp(x^2) * erfc(x)` does when evaluated naively.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// 1/sqrt(pi)
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Below this argument `exp(x^2)` overflows and `erfcx` returns `+inf`.
pub const ERFCX_OVERFLOW: f64 = -26.628_735_713_751_2;

/// Switch point to the asymptotic expansion; `erfc` itself underflows near 26.5.
const ERFCX_ASYMPTOTIC: f64 = 26.0;

/// `exp(x*x)` with the rounding error of the square folded back in, so the
/// relative error stays near one ulp even when `x*x` is large.
fn exp_x2(x: f64) -> f64 {
    let sq = x * x;
    let lo = x.mul_add(x, -sq);
    let e = sq.exp();
    e + e * lo
}

/// Scaled complementary error function `exp(x^2) * erfc(x)`.
///
/// Total on finite input. Strictly positive and strictly decreasing. Returns
/// `+inf` for `x < ERFCX_OVERFLOW`; callers that can reach that regime should
/// work with [`ln_erfcx`] instead.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= ERFCX_ASYMPTOTIC {
        return erfcx_asymptotic(x);
    }
    if x >= 0.0 {
        return exp_x2(x) * libm::erfc(x);
    }
    if x < ERFCX_OVERFLOW {
        return f64::INFINITY;
    }
    // erfc(x) = 2 - erfc(-x) is well conditioned for x < 0
    2.0 * exp_x2(x) - erfcx(-x)
}

/// `ln(erfcx(x))`, finite for every finite `x`.
pub fn ln_erfcx(x: f64) -> f64 {
    if x >= -1.0 {
        erfcx(x).ln()
    } else {
        // erfc(x) lies in (1, 2) here, so the log is exact to rounding
        x * x + libm::erfc(x).ln()
    }
}

/// Asymptotic series `1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k`.
/// At x >= 26 the terms shrink by at least 1/1352 per step.
fn erfcx_asymptotic(x: f64) -> f64 {
    let inv2x2 = 0.5 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= -((2 * k - 1) as f64) * inv2x2;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_1_SQRT_PI / x * sum
}

/// `log(sum(exp(v)))` with max-subtraction.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyReduction);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if max == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Two-argument form used in the hot loops.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Log density of `N(x; mean, variance)`.
pub fn gauss_log_pdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    if variance <= 0.0 || variance.is_nan() {
        return Err(Error::NonpositiveVariance);
    }
    let d = x - mean;
    Ok(-0.5 * (2.0 * PI * variance).ln() - d * d / (2.0 * variance))
}

/// Moments of a standard normal truncated to `[alpha, inf)`.
///
/// Returns `(mean - alpha, variance)`. The offset form keeps precision for
/// large `alpha`, where the mean is `alpha + 1/alpha + ...` and the variance
/// is `1/alpha^2 + ...`.
pub fn truncated_std_normal(alpha: f64) -> (f64, f64) {
    if alpha > 25.0 {
        let u = 1.0 / alpha;
        let u2 = u * u;
        // offset h(alpha) - alpha and variance 1 + alpha h - h^2 in powers of 1/alpha
        const OFFSET: [f64; 11] = [
            1.0,
            -2.0,
            10.0,
            -74.0,
            706.0,
            -8162.0,
            110410.0,
            -1708394.0,
            29752066.0,
            -576037442.0,
            12277827850.0,
        ];
        const VAR: [f64; 9] = [
            1.0,
            -6.0,
            50.0,
            -518.0,
            6354.0,
            -89782.0,
            1435330.0,
            -25625910.0,
            505785122.0,
        ];
        let offset = u * horner(&OFFSET, u2);
        let var = u2 * horner(&VAR, u2);
        return (offset, var);
    }
    // inverse Mills ratio phi(alpha)/Q(alpha) = sqrt(2/pi) / erfcx(alpha/sqrt 2)
    let h = (2.0 / PI).sqrt() / erfcx(alpha * std::f64::consts::FRAC_1_SQRT_2);
    let offset = h - alpha;
    let var = (1.0 - h * offset).max(0.0);
    (offset, var)
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
