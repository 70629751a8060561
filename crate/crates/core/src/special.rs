//! Scalar special functions: the centered Poisson log-MGF `phi`, the Lambert
//! W function on `[0, inf)`, the Bennett function `h` and its inverse, and the
//! cosh bracket around `phi(|x|)`.
//!
//! All functions are pure. Domain violations are reported as
//! [`Error::Domain`], never as a silent NaN.

use crate::error::{Error, Result};

/// Below this magnitude `phi` is evaluated by its Taylor polynomial.
const PHI_SERIES_SWITCH: f64 = 1e-4;

const W_MAX_ITER: usize = 64;
const W_RESIDUAL_TOL: f64 = 1e-14;

fn require_finite(func: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("argument {x} is not finite")))
    }
}

/// `phi(x) = e^x - 1 - x`, the log-MGF of a centered unit-rate Poisson variable.
///
/// Accurate to full relative precision near zero. Overflows to `+inf` once
/// `e^x` does (x > ~709.78).
pub fn phi(x: f64) -> Result<f64> {
    require_finite("phi", x)?;
    Ok(phi_unchecked(x))
}

// 1/k! for k = 2..=20
const INV_FACTORIALS: [f64; 19] = {
    let mut t = [0.0; 19];
    let mut f = 1.0;
    let mut k = 2;
    while k <= 20 {
        f *= k as f64;
        t[k - 2] = 1.0 / f;
        k += 1;
    }
    t
};

pub(crate) fn phi_unchecked(x: f64) -> f64 {
    let ax = x.abs();
    if ax < PHI_SERIES_SWITCH {
        let x2 = x * x;
        x2 * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
    } else if ax < 1.0 {
        // exp_m1(x) - x still cancels about log10(1/|x|) digits here
        let acc = INV_FACTORIALS.iter().rev().fold(0.0, |acc, c| acc * x + c);
        acc * x * x
    } else if x > 0.0 {
        // same exp(x) as cosh_minus_one, so the two stay ordered after rounding
        x.exp() - (1.0 + x)
    } else {
        x.exp_m1() - x
    }
}

/// `phi(|x|)`, the denominator of the two-sided variance-proxy ratio.
pub fn phi_abs(x: f64) -> Result<f64> {
    phi(x.abs())
}

/// `log phi(x)` without overflow for large positive `x`; `-inf` at `x = 0`.
pub(crate) fn ln_phi(x: f64) -> f64 {
    if x > 1.0 {
        // phi(x) = e^x (1 - (1 + x) e^{-x})
        x + (-(1.0 + x) * (-x).exp()).ln_1p()
    } else {
        phi_unchecked(x).ln()
    }
}

/// `cosh(x) - 1`, as `2 sinh^2(x/2)` for `|x| < 1`.
pub fn cosh_minus_one(x: f64) -> Result<f64> {
    require_finite("cosh_minus_one", x)?;
    let ax = x.abs();
    if ax < 1.0 {
        let s = (0.5 * x).sinh();
        Ok(2.0 * s * s)
    } else {
        let e = ax.exp();
        Ok(0.5 * (e + 1.0 / e) - 1.0)
    }
}

/// Returns `(cosh(x) - 1, 2 (cosh(x) - 1))`, the bracket known to contain
/// `phi(|x|)`.
pub fn cosh_bracket(x: f64) -> Result<(f64, f64)> {
    let c = cosh_minus_one(x)?;
    Ok((c, 2.0 * c))
}

/// Principal branch of the Lambert W function on `[0, inf]`.
///
/// Returns the unique `w >= 0` with `w e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(
            "lambert_w0",
            format!("argument {x} outside [0, inf]"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x > 100.0 {
        return Ok(lambert_w0_log_newton(x));
    }
    let mut w = if x < 1.0 {
        x
    } else if x >= std::f64::consts::E {
        let l = x.ln();
        l - l.ln()
    } else {
        x.ln_1p()
    };
    for _ in 0..W_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= W_RESIDUAL_TOL * x {
            break;
        }
        let wp1 = w + 1.0;
        // Halley step
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= f64::EPSILON * w.abs() {
            break;
        }
    }
    Ok(w.max(0.0))
}

/// Newton iteration on `w + ln w = ln x`, which keeps `w e^w` from
/// overflowing for huge `x`.
fn lambert_w0_log_newton(x: f64) -> f64 {
    let lx = x.ln();
    let mut w = lx - lx.ln();
    for _ in 0..W_MAX_ITER {
        let f = w + w.ln() - lx;
        let step = f / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

/// `h(u) = (1 + u) log(1 + u) - u`, strictly increasing on `[0, inf)`.
pub fn h(u: f64) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return Err(Error::domain("h", format!("argument {u} outside [0, inf)")));
    }
    if u == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if u < 1e-3 {
        // sum_{n>=2} (-1)^n u^n / (n (n - 1))
        let mut term = u * u;
        let mut acc = 0.0;
        let mut sign = 1.0;
        for n in 2..12 {
            let nf = n as f64;
            acc += sign * term / (nf * (nf - 1.0));
            term *= u;
            sign = -sign;
        }
        return Ok(acc);
    }
    Ok((1.0 + u) * u.ln_1p() - u)
}

/// Inverse of [`h`] on `[0, inf)`.
///
/// For `y >= 1` this is `exp(1 + W((y - 1)/e)) - 1` with the principal branch
/// on `[0, inf)`. For `y < 1` the argument of W falls in `[-1/e, 0)`; there the
/// shifted branch value `q = 1 + W((y - 1)/e)` in `[0, 1)` is solved from
/// `q e^q - (e^q - 1) = y` and `u = e^q - 1`.
pub fn h_inverse(y: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::domain(
            "h_inverse",
            format!("argument {y} outside [0, inf)"),
        ));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if y >= 1.0 {
        let w = lambert_w0((y - 1.0) / std::f64::consts::E)?;
        return Ok((1.0 + w).exp() - 1.0);
    }
    Ok(shifted_branch_q(y).exp_m1())
}

/// `k(q) = q e^q - (e^q - 1)`, which equals `h(e^q - 1)`.
fn k_shifted(q: f64) -> f64 {
    if q < 0.1 {
        // sum_{m>=2} (m - 1) q^m / m!
        let mut term = q * q / 2.0;
        let mut acc = 0.0;
        for m in 2..20 {
            acc += (m as f64 - 1.0) * term;
            term *= q / (m as f64 + 1.0);
        }
        acc
    } else {
        q * q.exp() - q.exp_m1()
    }
}

/// Solves `k(q) = y` for `q` in `[0, 1)` given `0 < y < 1`. `k` is increasing
/// and convex on `q > 0` and `q0 = sqrt(2 y)` lies right of the root, so
/// Newton converges monotonically from the right.
fn shifted_branch_q(y: f64) -> f64 {
    let mut q = (2.0 * y).sqrt().min(1.0);
    for _ in 0..W_MAX_ITER {
        let f = k_shifted(q) - y;
        let step = f / (q * q.exp());
        let next = (q - step).max(0.5 * q);
        if (q - next).abs() <= 2.0 * f64::EPSILON * q {
            q = next;
            break;
        }
        q = next;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0).unwrap(), 0.0);
        assert!(rel(phi(1.0).unwrap(), E - 2.0) < 1e-15);
        assert!(rel(phi_abs(2.0).unwrap(), E * E - 3.0) < 1e-15);
        assert_eq!(phi_abs(-1.0).unwrap(), phi(1.0).unwrap());
    }

    #[test]
    fn phi_rejects_non_finite() {
        assert!(matches!(phi(f64::NAN), Err(Error::Domain { .. })));
        assert!(phi(f64::INFINITY).is_err());
        assert!(phi_abs(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn phi_switch_is_continuous() {
        let a = phi(PHI_SERIES_SWITCH * (1.0 - 1e-12)).unwrap();
        let b = phi(PHI_SERIES_SWITCH * (1.0 + 1e-12)).unwrap();
        assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn ln_phi_large_argument() {
        assert!(rel(ln_phi(800.0), 800.0) < 1e-15);
        assert!(rel(ln_phi(2.0), phi(2.0).unwrap().ln()) < 1e-14);
        assert_eq!(ln_phi(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn lambert_w_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!(rel(lambert_w0(E).unwrap(), 1.0) < 1e-15);
        assert_eq!(lambert_w0(f64::INFINITY).unwrap(), f64::INFINITY);
        assert!(lambert_w0(-1e-3).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn lambert_w_huge() {
        let x = 1e300;
        let w = lambert_w0(x).unwrap();
        assert!(rel(w + w.ln(), x.ln()) < 1e-14);
    }

    #[test]
    fn h_values() {
        assert_eq!(h(0.0).unwrap(), 0.0);
        assert!(rel(h(E - 1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(h(1.0).unwrap(), 2.0 * 2f64.ln() - 1.0) < 1e-14);
        assert!(h(-0.5).is_err());
        assert!(rel(h(1e-6).unwrap(), 0.5e-12 - 1e-18 / 6.0 + 1e-24 / 12.0) < 1e-14);
    }

    #[test]
    fn h_inverse_values() {
        assert_eq!(h_inverse(0.0).unwrap(), 0.0);
        assert!(rel(h_inverse(1.0).unwrap(), E - 1.0) < 1e-14);
        assert!(h_inverse(-1.0).is_err());
    }

    #[test]
    fn h_inverse_tiny() {
        for y in [1e-300, 1e-40, 1e-12, 1e-4] {
            let u = h_inverse(y).unwrap();
            assert!(rel(h(u).unwrap(), y) < 1e-12, "y={y}");
        }
    }
}
