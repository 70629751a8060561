//! Centered log-MGF providers.
//!
//! Anything whose centered log-MGF `lambda -> log E exp(lambda (X - E X))` can be
//! evaluated implements [`CenteredLogMgf`] and can be fed to the proxy solver.
//! Besides the closed-form catalog this module provides finitely supported
//! laws and scale mixtures, which realise derived variables such as `|X|` or
//! `xi * X` exactly.

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::special::phi_unchecked;

pub trait CenteredLogMgf {
    /// `log E exp(lambda (X - E X))`, `+inf` where the MGF diverges.
    fn clmgf(&self, lambda: f64) -> ExtendedReal;

    /// Natural log of [`clmgf`](Self::clmgf). Implementations override this
    /// when the log-MGF itself overflows an `f64` while its logarithm does not.
    fn ln_clmgf(&self, lambda: f64) -> f64 {
        let v = self.clmgf(lambda).value();
        if v <= 0.0 {
            f64::NEG_INFINITY
        } else {
            v.ln()
        }
    }

    /// `Var(X)`, the limit of `clmgf(lambda) / phi(|lambda|)` as `lambda -> 0`.
    fn variance(&self) -> f64;
}

impl<T: CenteredLogMgf + ?Sized> CenteredLogMgf for &T {
    fn clmgf(&self, lambda: f64) -> ExtendedReal {
        (**self).clmgf(lambda)
    }

    fn ln_clmgf(&self, lambda: f64) -> f64 {
        (**self).ln_clmgf(lambda)
    }

    fn variance(&self) -> f64 {
        (**self).variance()
    }
}

/// The law of `-X`.
#[derive(Debug, Clone, Copy)]
pub struct Negated<P>(pub P);

impl<P: CenteredLogMgf> CenteredLogMgf for Negated<P> {
    fn clmgf(&self, lambda: f64) -> ExtendedReal {
        self.0.clmgf(-lambda)
    }

    fn ln_clmgf(&self, lambda: f64) -> f64 {
        self.0.ln_clmgf(-lambda)
    }

    fn variance(&self) -> f64 {
        self.0.variance()
    }
}

/// `log(exp(a) + exp(b))`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::INFINITY {
        return f64::INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn deviation_range(d: &[f64]) -> (f64, f64) {
    d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// `log sum_i w_i exp(lambda d_i)` for weights summing to one and deviations
/// `d_i` with (approximately) zero weighted mean.
///
/// When `|lambda d_i| < 1` for all `i` this evaluates
/// `log1p(sum w_i phi(lambda d_i) + lambda sum w_i d_i)`, which keeps full
/// relative precision as `lambda -> 0`. Otherwise it uses a max-shifted
/// log-sum-exp. `range` is the smallest and largest deviation.
pub(crate) fn weighted_centered_lmgf(
    deviations: &[f64],
    range: (f64, f64),
    weight: impl Fn(usize) -> f64,
    lambda: f64,
) -> f64 {
    let max_abs = range.0.abs().max(range.1.abs());
    if lambda.abs() * max_abs < 1.0 {
        let mut acc = 0.0;
        let mut lin = 0.0;
        for (i, &d) in deviations.iter().enumerate() {
            let w = weight(i);
            acc += w * phi_unchecked(lambda * d);
            lin += w * d;
        }
        return (acc + lambda * lin).ln_1p().max(0.0);
    }
    let shift = (lambda * range.0).max(lambda * range.1);
    let s: f64 = deviations
        .iter()
        .enumerate()
        .map(|(i, d)| weight(i) * (lambda * d - shift).exp())
        .sum();
    (shift + s.ln()).max(0.0)
}

/// A probability law with finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
    mean: f64,
    deviations: Vec<f64>,
    range: (f64, f64),
}

impl FiniteLaw {
    /// Builds a law from `(value, probability)` atoms. Probabilities are
    /// renormalised; atoms closer than `1e-12` (relative) are merged.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::argument("finite law needs at least one atom"));
        }
        for &(x, p) in &atoms {
            if !x.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::argument(format!("invalid atom ({x}, {p})")));
            }
        }
        atoms.retain(|&(_, p)| p > 0.0);
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if total <= 0.0 {
            return Err(Error::argument("finite law has zero total mass"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match values.last() {
                Some(&last) if (x - last).abs() <= 1e-12 * last.abs().max(1.0) => {
                    *probs.last_mut().unwrap() += p;
                }
                _ => {
                    values.push(x);
                    probs.push(p);
                }
            }
        }
        for p in &mut probs {
            *p /= total;
        }
        let mean = values.iter().zip(&probs).map(|(x, p)| x * p).sum();
        let deviations: Vec<f64> = values.iter().map(|x| x - mean).collect();
        let range = deviation_range(&deviations);
        Ok(FiniteLaw { values, probs, mean, deviations, range })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Law of `f(X)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<FiniteLaw> {
        FiniteLaw::new(self.atoms().map(|(x, p)| (f(x), p)))
    }

    /// Law of `|X - E X|`.
    pub fn abs_centered(&self) -> Result<FiniteLaw> {
        let m = self.mean;
        self.map(|x| (x - m).abs())
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &FiniteLaw) -> Result<FiniteLaw> {
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        for (x, p) in self.atoms() {
            for (y, q) in other.atoms() {
                atoms.push((x + y, p * q));
            }
        }
        FiniteLaw::new(atoms)
    }
}

impl CenteredLogMgf for FiniteLaw {
    fn clmgf(&self, lambda: f64) -> ExtendedReal {
        let v = weighted_centered_lmgf(&self.deviations, self.range, |i| self.probs[i], lambda);
        ExtendedReal::from_f64_unchecked(v)
    }

    fn variance(&self) -> f64 {
        self.deviations
            .iter()
            .zip(&self.probs)
            .map(|(d, p)| p * d * d)
            .sum()
    }
}

/// The law of `xi * X` where `X` is a centered catalog member and `xi` is an
/// independent discrete multiplier taking value `scale_i` with probability
/// `weight_i`.
#[derive(Debug, Clone)]
pub struct ScaleMixture {
    base: Distribution,
    weights: Vec<f64>,
    scales: Vec<f64>,
}

impl ScaleMixture {
    pub fn new(base: Distribution, mixture: &[(f64, f64)]) -> Result<Self> {
        base.validate()?;
        let (mean, _) = base.moments();
        if mean != 0.0 {
            return Err(Error::argument(format!(
                "scale mixture requires a centered base variable, got mean {mean}"
            )));
        }
        if mixture.is_empty() {
            return Err(Error::argument("scale mixture needs at least one component"));
        }
        let total: f64 = mixture.iter().map(|m| m.0).sum();
        if mixture
            .iter()
            .any(|&(w, c)| !(w >= 0.0) || !c.is_finite())
            || !(total > 0.0)
        {
            return Err(Error::argument("invalid scale mixture weights or scales"));
        }
        Ok(ScaleMixture {
            base,
            weights: mixture.iter().map(|m| m.0 / total).collect(),
            scales: mixture.iter().map(|m| m.1).collect(),
        })
    }

    pub fn max_abs_scale(&self) -> f64 {
        self.scales.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

impl CenteredLogMgf for ScaleMixture {
    fn clmgf(&self, lambda: f64) -> ExtendedReal {
        let ln = self.ln_clmgf(lambda);
        if ln > 1.0 {
            return ExtendedReal::from_f64_unchecked(ln.exp());
        }
        let inner: Vec<f64> = self
            .scales
            .iter()
            .map(|&c| self.base.clmgf(c * lambda).value())
            .collect();
        if inner.iter().all(|g| *g < 1.0) {
            // log1p(sum w_i expm1(g_i)) keeps precision for small lambda
            let s: f64 = inner
                .iter()
                .zip(&self.weights)
                .map(|(g, w)| w * g.exp_m1())
                .sum();
            return ExtendedReal::from_f64_unchecked(s.ln_1p().max(0.0));
        }
        let shift = inner.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = inner
            .iter()
            .zip(&self.weights)
            .map(|(g, w)| w * (g - shift).exp())
            .sum();
        ExtendedReal::from_f64_unchecked((shift + s.ln()).max(0.0))
    }

    fn ln_clmgf(&self, lambda: f64) -> f64 {
        // Work with L_i = log g_i, g_i = clmgf_base(c_i lambda), so that a
        // base log-MGF beyond f64 range does not masquerade as divergence.
        let logs: Vec<(f64, f64)> = self
            .scales
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&c, &w)| (w, self.base.ln_clmgf(c * lambda)))
            .collect();
        let l_max = logs.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        if l_max == f64::INFINITY {
            return f64::INFINITY;
        }
        if l_max > 700.0 {
            // log sum_i w_i exp(g_i) = g_max + log(sum over maximal terms) + o(1)
            let w_top: f64 = logs.iter().filter(|x| x.1 == l_max).map(|x| x.0).sum();
            return l_max + (w_top.ln() / l_max.exp()).ln_1p();
        }
        let inner: Vec<(f64, f64)> = logs.iter().map(|&(w, l)| (w, l.exp())).collect();
        let g_max = l_max.exp();
        if g_max < 1.0 {
            let s: f64 = inner.iter().map(|(w, g)| w * g.exp_m1()).sum();
            let v = s.ln_1p();
            return if v <= 0.0 { f64::NEG_INFINITY } else { v.ln() };
        }
        let s: f64 = inner.iter().map(|(w, g)| w * (g - g_max).exp()).sum();
        (g_max + s.ln()).ln()
    }

    fn variance(&self) -> f64 {
        let v = self.base.moments().1;
        self.scales
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c * c * v)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_law_merges_and_normalises() {
        let law = FiniteLaw::new([(1.0, 1.0), (0.0, 2.0), (1.0 + 1e-15, 1.0)]).unwrap();
        assert_eq!(law.len(), 2);
        assert!((law.probs()[1] - 0.5).abs() < 1e-15);
        assert!((law.mean() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn finite_law_rejects_bad_atoms() {
        assert!(FiniteLaw::new(Vec::<(f64, f64)>::new()).is_err());
        assert!(FiniteLaw::new([(f64::NAN, 1.0)]).is_err());
        assert!(FiniteLaw::new([(1.0, -1.0)]).is_err());
    }

    #[test]
    fn rademacher_law_matches_log_cosh() {
        let law = FiniteLaw::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        for l in [1e-7f64, 0.3, 2.0, 40.0] {
            let want = (2.0 * (0.5 * l).sinh().powi(2)).ln_1p();
            let got = law.clmgf(l).value();
            assert!(((got - want) / want).abs() < 1e-12, "lambda={l}");
        }
        assert_eq!(law.variance(), 1.0);
    }

    #[test]
    fn log_add_handles_infinities() {
        assert_eq!(log_add(f64::NEG_INFINITY, 2.0), 2.0);
        assert_eq!(log_add(1.0, f64::INFINITY), f64::INFINITY);
        assert!((log_add(0.0, 0.0) - 2f64.ln()).abs() < 1e-16);
    }

    #[test]
    fn scale_mixture_requires_centered_base() {
        let r = ScaleMixture::new(Distribution::Poisson { a: 1.0 }, &[(1.0, 0.5)]);
        assert!(r.is_err());
        let m = ScaleMixture::new(Distribution::Rademacher, &[(0.5, 0.5), (0.5, 1.0)]).unwrap();
        assert!((m.variance() - 0.625).abs() < 1e-15);
        let l: f64 = 0.8;
        let want = (0.5 * (0.5 * l).cosh() + 0.5 * l.cosh()).ln();
        assert!((m.clmgf(l).value() - want).abs() < 1e-15);
    }
}
