//! Incomplete-gamma helpers and the exponential integral.
//!
//! The Nakagami-m machinery needs the upper incomplete gamma function
//! `Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt` for real order `a` down to
//! `a = m - 1 >= -0.5`, which is below what off-the-shelf regularized
//! implementations cover. Orders `a > 0` delegate to `statrs`; `a = 0` is the
//! exponential integral `E_1`; negative orders use the upward recurrence
//! `Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a`.

use crate::error::{Error, Result};
use statrs::function::gamma as sg;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 500;

/// Complete gamma function.
pub fn gamma(a: f64) -> f64 {
    sg::gamma(a)
}

/// Regularized lower incomplete gamma `P(a, x)`, `a > 0`, `x >= 0`.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    sg::gamma_lr(a, x)
}

/// Exponential integral `E_1(x) = int_x^inf e^{-t}/t dt` for `x > 0`.
///
/// Series about the origin for `x < 1.5`, modified Lentz continued fraction
/// otherwise.
pub fn exp1(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::SpecialDomain(format!("E1 requires x > 0, got {x}")));
    }
    if x < 1.5 {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=MAX_ITER {
            term *= -x / k as f64;
            let contrib = -term / k as f64;
            sum += contrib;
            if contrib.abs() < sum.abs() * f64::EPSILON {
                return Ok(-EULER_GAMMA - x.ln() + sum);
            }
        }
        Err(Error::SpecialConvergence(format!("E1 series at x={x}")))
    } else {
        // E1(x) = e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
        let tiny = 1e-300;
        let b0 = x + 1.0;
        let mut f = if b0.abs() < tiny { tiny } else { b0 };
        let mut c = f;
        let mut d = 0.0;
        for n in 1..=MAX_ITER {
            let an = -((n * n) as f64);
            let bn = x + (2 * n + 1) as f64;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            d = 1.0 / d;
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 4.0 * f64::EPSILON {
                return Ok((-x).exp() / f);
            }
        }
        Err(Error::SpecialConvergence(format!(
            "E1 continued fraction at x={x}"
        )))
    }
}

/// Upper incomplete gamma `Gamma(a, x)` for real `a` and `x >= 0`.
///
/// `x = 0` is allowed only for `a > 0` (the limit is the complete gamma);
/// for `a <= 0` the integral diverges at the origin.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::SpecialDomain(format!(
            "Gamma(a, x) requires x >= 0, got x={x}"
        )));
    }
    if x == 0.0 {
        if a > 0.0 {
            return Ok(gamma(a));
        }
        return Err(Error::SpecialDomain(format!(
            "Gamma({a}, x) diverges as x -> 0 for a <= 0"
        )));
    }
    if a > 0.0 {
        return Ok(sg::gamma_ur(a, x) * gamma(a));
    }
    if a == 0.0 {
        return exp1(x);
    }
    // Upward recurrence from a+1; depth is ceil(|a|), so small here.
    let above = upper_incomplete_gamma(a + 1.0, x)?;
    Ok((above - (a * x.ln() - x).exp()) / a)
}

/// Lower incomplete gamma `gamma(a, x)` for `a > 0` (complement of the upper).
pub fn lower_incomplete_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    sg::gamma_lr(a, x) * gamma(a)
}
