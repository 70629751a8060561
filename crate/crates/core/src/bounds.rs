//! Bennett and Bernstein tail bounds for upper sub-Poisson variables.
//!
//! For a variable with upper proxy `s2` and `t >= 0`:
//!
//! ```text
//! P(X - E X >= t) <= exp(-s2) (e s2 / (s2 + t))^(s2 + t)          bennett
//!                 <= exp(-(t^2 / 2) / (s2 + t / 3))                 bernstein1
//!                 <= exp(-min(t^2 / (4 s2), 3 t / 4))               bernstein2
//! ```
//!
//! Every bound is evaluated as a log-exponent and exponentiated once.
//! A zero proxy means the variable is a.s. constant, so the tail is `0` for
//! `t > 0`; [`tail_bound`] reports that case exactly while the named formula
//! functions reject it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proxy::Side;
use crate::special::phi_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Bennett,
    Bernstein1,
    Bernstein2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [BoundKind::Bennett, BoundKind::Bernstein1, BoundKind::Bernstein2];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Bennett => "bennett",
            BoundKind::Bernstein1 => "bernstein1",
            BoundKind::Bernstein2 => "bernstein2",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bennett" => Ok(BoundKind::Bennett),
            "bernstein1" => Ok(BoundKind::Bernstein1),
            "bernstein2" => Ok(BoundKind::Bernstein2),
            _ => Err(Error::argument(format!("unknown bound kind {s:?}"))),
        }
    }
}

fn check_args(func: &'static str, sigma2: f64, t: f64) -> Result<()> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::domain(
            func,
            format!("sigma2 = {sigma2}; need 0 < sigma2 < inf (sigma2 = 0 is the degenerate case, see tail_bound)"),
        ));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(func, format!("t = {t}; need finite t >= 0")));
    }
    Ok(())
}

/// `log` of the Bennett bound: `-s2 + (s2 + t)(1 + log s2 - log(s2 + t))`,
/// rearranged as `t - (s2 + t) log1p(t / s2)`.
pub fn ln_bennett(sigma2: f64, t: f64) -> Result<f64> {
    check_args("bennett", sigma2, t)?;
    Ok(t - (sigma2 + t) * (t / sigma2).ln_1p())
}

pub fn bennett(sigma2: f64, t: f64) -> Result<f64> {
    Ok(ln_bennett(sigma2, t)?.min(0.0).exp())
}

pub fn ln_bernstein1(sigma2: f64, t: f64) -> Result<f64> {
    check_args("bernstein1", sigma2, t)?;
    Ok(-(0.5 * t * t) / (sigma2 + t / 3.0))
}

pub fn bernstein1(sigma2: f64, t: f64) -> Result<f64> {
    Ok(ln_bernstein1(sigma2, t)?.exp())
}

pub fn ln_bernstein2(sigma2: f64, t: f64) -> Result<f64> {
    check_args("bernstein2", sigma2, t)?;
    Ok(-(t * t / (4.0 * sigma2)).min(0.75 * t))
}

pub fn bernstein2(sigma2: f64, t: f64) -> Result<f64> {
    Ok(ln_bernstein2(sigma2, t)?.exp())
}

/// Minimiser `log(1 + t / s2)` of the Chernoff exponent `-lambda t + s2 phi(lambda)`.
pub fn chernoff_lambda_star(sigma2: f64, t: f64) -> Result<f64> {
    check_args("chernoff_lambda_star", sigma2, t)?;
    Ok((t / sigma2).ln_1p())
}

/// `exp(-lambda t + s2 phi(lambda))`, the Chernoff bound at a fixed `lambda`.
pub fn chernoff_at(sigma2: f64, t: f64, lambda: f64) -> f64 {
    (-lambda * t + sigma2 * phi_unchecked(lambda)).exp()
}

/// Named bound for `sigma2 > 0`.
pub fn bound(kind: BoundKind, sigma2: f64, t: f64) -> Result<f64> {
    match kind {
        BoundKind::Bennett => bennett(sigma2, t),
        BoundKind::Bernstein1 => bernstein1(sigma2, t),
        BoundKind::Bernstein2 => bernstein2(sigma2, t),
    }
}

/// Like [`bound`] but also accepts `sigma2 = 0`, which returns `1` at `t = 0`
/// and `0` for `t > 0` (the variable equals its mean almost surely).
pub fn tail_bound(kind: BoundKind, sigma2: f64, t: f64) -> Result<f64> {
    if sigma2 == 0.0 {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain("tail_bound", format!("t = {t}; need finite t >= 0")));
        }
        return Ok(if t == 0.0 { 1.0 } else { 0.0 });
    }
    bound(kind, sigma2, t)
}

/// `min(1, bound(s2_plus, t) + bound(s2_minus, t))`, bounding `P(|X - E X| >= t)`.
pub fn two_sided_bound(kind: BoundKind, sigma2_plus: f64, sigma2_minus: f64, t: f64) -> Result<f64> {
    let up = bound(kind, sigma2_plus, t)?;
    let lo = bound(kind, sigma2_minus, t)?;
    Ok((up + lo).clamp(0.0, 1.0))
}

/// Bound for an independent sum whose terms have the given upper proxies.
pub fn sum_bound(kind: BoundKind, proxies: &[f64], t: f64) -> Result<f64> {
    if proxies.is_empty() {
        return Err(Error::argument("sum_bound needs at least one proxy"));
    }
    if let Some(bad) = proxies.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::domain("sum_bound", format!("proxy {bad} is not positive")));
    }
    bound(kind, proxies.iter().sum(), t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub side: Side,
    pub sigma2: f64,
    pub points: Vec<(f64, f64)>,
}

impl BoundCurve {
    /// Evaluates one bound kind over `ts`. For `Side::TwoSided` the same proxy
    /// is used for both tails.
    pub fn new(kind: BoundKind, side: Side, sigma2: f64, ts: &[f64]) -> Result<Self> {
        let points = ts
            .iter()
            .map(|&t| {
                let v = match side {
                    Side::TwoSided if sigma2 > 0.0 => two_sided_bound(kind, sigma2, sigma2, t)?,
                    Side::TwoSided => (2.0 * tail_bound(kind, sigma2, t)?).min(1.0),
                    _ => tail_bound(kind, sigma2, t)?,
                };
                Ok((t, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundCurve { kind, side, sigma2, points })
    }
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a single value.
pub fn parse_t_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::argument(format!("bad number {s:?} in t range")))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a || a < 0.0 {
                return Err(Error::argument(format!("invalid t range {spec:?}")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            if n > 10_000_000 {
                return Err(Error::argument("t range too long"));
            }
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(Error::argument(format!("t range must be start:stop:step, got {spec:?}"))),
    }
}
