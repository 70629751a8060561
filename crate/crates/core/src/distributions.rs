//! The distribution catalog: closed-form moments and centered log-MGFs, the
//! exactly known variance proxies, seeded samplers, and the descriptor text
//! form (`poisson(4)`, `sum(poisson(1),bernoulli(0.2))`).
//!
//! Descriptor grammar (names are case-insensitive, whitespace is ignored):
//!
//! ```text
//! descriptor = name [ "(" [ number { "," number } ] ")" ]
//!            | "sum" "(" descriptor { "," descriptor } ")"
//! name       = "bernoulli" | "binomial" | "rademacher" | "scaledrademacher"
//!            | "poisson" | "skellam" | "scaledskellam" | "gaussian" | "normal"
//!            | "exponential" | "pointmass"
//! ```

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution as _, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::empirical::SampleSet;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::mgf::{log_add, CenteredLogMgf, FiniteLaw};
use crate::special::{ln_phi, phi_unchecked};

/// A catalog member. Use [`Distribution::validate`] (or [`parse`](Distribution::parse))
/// before evaluating anything on a hand-built value.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Bernoulli { p: f64 },
    Binomial { n: u32, p: f64 },
    Rademacher,
    /// `+-a` with probability 1/2 each.
    ScaledRademacher { a: f64 },
    Poisson { a: f64 },
    /// `X1 - X2` with independent `X1 ~ Poisson(a1)`, `X2 ~ Poisson(a2)`.
    Skellam { a1: f64, a2: f64 },
    /// `a * Skellam(1, 1)`.
    ScaledSkellam { a: f64 },
    Gaussian { mu: f64, sigma2: f64 },
    Exponential { rate: f64 },
    PointMass { c: f64 },
    IndependentSum(Vec<Distribution>),
}

/// Known optimal sub-Poisson variance proxies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticProxies {
    pub sp_upper: ExtendedReal,
    pub sp_lower: ExtendedReal,
    pub sp_two_sided: ExtendedReal,
    pub source: &'static str,
}

impl AnalyticProxies {
    fn new(upper: f64, lower: f64, source: &'static str) -> Self {
        let upper = ExtendedReal::from_f64_unchecked(upper);
        let lower = ExtendedReal::from_f64_unchecked(lower);
        AnalyticProxies {
            sp_upper: upper,
            sp_lower: lower,
            sp_two_sided: upper.max(lower),
            source,
        }
    }

    fn symmetric(v: f64, source: &'static str) -> Self {
        Self::new(v, v, source)
    }
}

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::argument(format!("invalid parameter: {what}")))
    }
}

fn nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        use Distribution::*;
        match self {
            Bernoulli { p } => check(nonneg(*p) && *p <= 1.0, "p must lie in [0, 1]"),
            Binomial { n, p } => {
                check(*n >= 1, "n must be >= 1")?;
                check(nonneg(*p) && *p <= 1.0, "p must lie in [0, 1]")
            }
            Rademacher => Ok(()),
            ScaledRademacher { a } | ScaledSkellam { a } => check(nonneg(*a), "a must be >= 0"),
            Poisson { a } => check(nonneg(*a), "a must be >= 0"),
            Skellam { a1, a2 } => check(nonneg(*a1) && nonneg(*a2), "a1, a2 must be >= 0"),
            Gaussian { mu, sigma2 } => {
                check(mu.is_finite(), "mu must be finite")?;
                check(nonneg(*sigma2), "sigma2 must be >= 0")
            }
            Exponential { rate } => check(rate.is_finite() && *rate > 0.0, "rate must be > 0"),
            PointMass { c } => check(c.is_finite(), "c must be finite"),
            IndependentSum(members) => {
                check(!members.is_empty(), "sum needs at least one member")?;
                members.iter().try_for_each(Distribution::validate)
            }
        }
    }

    /// `(E X, Var X)` in closed form.
    pub fn moments(&self) -> (f64, f64) {
        use Distribution::*;
        match *self {
            Bernoulli { p } => (p, p * (1.0 - p)),
            Binomial { n, p } => {
                let n = n as f64;
                (n * p, n * p * (1.0 - p))
            }
            Rademacher => (0.0, 1.0),
            ScaledRademacher { a } => (0.0, a * a),
            Poisson { a } => (a, a),
            Skellam { a1, a2 } => (a1 - a2, a1 + a2),
            ScaledSkellam { a } => (0.0, 2.0 * a * a),
            Gaussian { mu, sigma2 } => (mu, sigma2),
            Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate)),
            PointMass { c } => (c, 0.0),
            IndependentSum(ref members) => members.iter().fold((0.0, 0.0), |(m, v), d| {
                let (dm, dv) = d.moments();
                (m + dm, v + dv)
            }),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    /// The exactly known optimal proxies, or `None` where only a certificate
    /// is available (independent sums).
    pub fn analytic_proxies(&self) -> Option<AnalyticProxies> {
        use Distribution::*;
        Some(match *self {
            Bernoulli { p } => AnalyticProxies::symmetric(p * (1.0 - p), "example:bernoulli"),
            Binomial { n, p } => {
                AnalyticProxies::symmetric(n as f64 * p * (1.0 - p), "example:binomial")
            }
            Rademacher => AnalyticProxies::symmetric(1.0, "example:rademacher"),
            ScaledRademacher { a } => {
                AnalyticProxies::symmetric(a * a, "example:scaled-rademacher")
            }
            Poisson { a } => AnalyticProxies::symmetric(a, "example:poisson"),
            Skellam { a1, a2 } => AnalyticProxies::symmetric(a1 + a2, "example:skellam"),
            ScaledSkellam { a } => {
                let v = if a <= 1.0 { 2.0 * a * a } else { f64::INFINITY };
                AnalyticProxies::symmetric(v, "example:scaled-skellam")
            }
            Gaussian { sigma2, .. } => AnalyticProxies::symmetric(sigma2, "example:gaussian"),
            Exponential { rate } => {
                AnalyticProxies::new(f64::INFINITY, 1.0 / (rate * rate), "example:exponential")
            }
            PointMass { .. } => AnalyticProxies::symmetric(0.0, "prop:degenerate"),
            IndependentSum(_) => return None,
        })
    }

    /// True when every draw lies on a finite or countable support.
    pub fn is_discrete(&self) -> bool {
        use Distribution::*;
        match self {
            Gaussian { sigma2, .. } => *sigma2 == 0.0,
            Exponential { .. } => false,
            IndependentSum(m) => m.iter().all(Distribution::is_discrete),
            _ => true,
        }
    }

    /// Whether the centered variable `X - E X` is sub-Gaussian (bounded
    /// support or Gaussian).
    pub fn is_sub_gaussian(&self) -> bool {
        use Distribution::*;
        match self {
            Bernoulli { .. } | Binomial { .. } | Rademacher | ScaledRademacher { .. } => true,
            Gaussian { .. } | PointMass { .. } => true,
            Poisson { a } => *a == 0.0,
            Skellam { a1, a2 } => *a1 == 0.0 && *a2 == 0.0,
            ScaledSkellam { a } => *a == 0.0,
            Exponential { .. } => false,
            IndependentSum(m) => m.iter().all(Distribution::is_sub_gaussian),
        }
    }

    /// True for laws symmetric about their mean.
    pub fn is_symmetric(&self) -> bool {
        use Distribution::*;
        match self {
            Rademacher | ScaledRademacher { .. } | ScaledSkellam { .. } => true,
            Gaussian { .. } | PointMass { .. } => true,
            Bernoulli { p } => *p == 0.5 || *p == 0.0 || *p == 1.0,
            Binomial { p, .. } => *p == 0.5 || *p == 0.0 || *p == 1.0,
            Poisson { a } => *a == 0.0,
            Skellam { a1, a2 } => a1 == a2,
            Exponential { .. } => false,
            IndependentSum(m) => m.iter().all(Distribution::is_symmetric),
        }
    }

    /// The law as finitely many atoms, truncating unbounded discrete supports
    /// where the remaining tail mass falls below `tail_mass`. `None` for
    /// members with a continuous part.
    pub fn finite_law(&self, tail_mass: f64) -> Option<FiniteLaw> {
        use Distribution::*;
        let law = match *self {
            Bernoulli { p } => FiniteLaw::new([(0.0, 1.0 - p), (1.0, p)]),
            Binomial { n, p } => FiniteLaw::new(binomial_pmf(n, p)),
            Rademacher => FiniteLaw::new([(-1.0, 0.5), (1.0, 0.5)]),
            ScaledRademacher { a } => FiniteLaw::new([(-a, 0.5), (a, 0.5)]),
            Poisson { a } => FiniteLaw::new(poisson_pmf(a, tail_mass)),
            Skellam { a1, a2 } => skellam_law(a1, a2, tail_mass),
            ScaledSkellam { a } => skellam_law(1.0, 1.0, tail_mass).and_then(|l| l.map(|x| a * x)),
            Gaussian { mu, sigma2 } if sigma2 == 0.0 => FiniteLaw::new([(mu, 1.0)]),
            Gaussian { .. } | Exponential { .. } => return None,
            PointMass { c } => FiniteLaw::new([(c, 1.0)]),
            IndependentSum(ref members) => {
                let mut acc: Option<FiniteLaw> = None;
                for m in members {
                    let law = m.finite_law(tail_mass)?;
                    acc = Some(match acc {
                        None => law,
                        Some(prev) => prev.convolve(&law).ok()?,
                    });
                }
                return acc;
            }
        };
        law.ok()
    }

    /// Parses a descriptor such as `skellam(3,1)` or `sum(poisson(1),bernoulli(0.2))`.
    pub fn parse(text: &str) -> Result<Distribution> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let d = p.descriptor()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        d.validate().map_err(|e| Error::Parse { pos: 0, msg: e.to_string() })?;
        Ok(d)
    }

    /// `n` independent draws, reproducible from `(self, n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let values = self.sample_with(&mut rng, n)?;
        SampleSet::new(values, seed, self.to_string())
    }

    /// Draws from a caller-provided generator; used by sharded Monte-Carlo runs.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::argument("sample size must be >= 1"));
        }
        self.validate()?;
        let sampler = Sampler::new(self);
        Ok((0..n).map(|_| sampler.draw(rng)).collect())
    }
}

/// The reference members with exactly known proxies, in a fixed order.
pub fn catalog() -> Vec<Distribution> {
    use Distribution::*;
    let mut v = Vec::new();
    for p in [0.01, 0.3, 0.5, 0.9] {
        v.push(Bernoulli { p });
    }
    v.push(Binomial { n: 10, p: 0.3 });
    v.push(Rademacher);
    for a in [0.5, 2.0] {
        v.push(ScaledRademacher { a });
    }
    for a in [0.1, 1.0, 10.0] {
        v.push(Poisson { a });
    }
    v.push(Skellam { a1: 3.0, a2: 1.0 });
    for a in [0.5, 1.0, 1.5] {
        v.push(ScaledSkellam { a });
    }
    for sigma2 in [0.25, 1.0, 4.0] {
        v.push(Gaussian { mu: 0.0, sigma2 });
    }
    v.push(Exponential { rate: 1.0 });
    v.push(PointMass { c: 5.0 });
    v
}

fn bernoulli_clmgf(p: f64, lambda: f64) -> f64 {
    if p == 0.0 || p == 1.0 || lambda == 0.0 {
        return 0.0;
    }
    let v = if lambda > 30.0 {
        lambda * (1.0 - p) + (p + (1.0 - p) * (-lambda).exp()).ln()
    } else {
        (p * lambda.exp_m1()).ln_1p() - lambda * p
    };
    v.max(0.0)
}

/// `log cosh(x)`.
fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1.0 {
        let s = (0.5 * ax).sinh();
        (2.0 * s * s).ln_1p()
    } else {
        ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
    }
}

/// `-log(1 - x) - x` for `x < 1`.
fn neg_log1m_minus(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let mut term = x * x;
        let mut acc = 0.0;
        for k in 2..16 {
            acc += term / k as f64;
            term *= x;
        }
        acc
    } else {
        -(-x).ln_1p() - x
    }
}

fn ln_pos(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

impl CenteredLogMgf for Distribution {
    fn clmgf(&self, lambda: f64) -> ExtendedReal {
        use Distribution::*;
        let v = match *self {
            Bernoulli { p } => bernoulli_clmgf(p, lambda),
            Binomial { n, p } => n as f64 * bernoulli_clmgf(p, lambda),
            Rademacher => ln_cosh(lambda),
            ScaledRademacher { a } => ln_cosh(a * lambda),
            Poisson { a } => scaled(a, phi_unchecked(lambda)),
            Skellam { a1, a2 } => {
                scaled(a1, phi_unchecked(lambda)) + scaled(a2, phi_unchecked(-lambda))
            }
            ScaledSkellam { a } => phi_unchecked(a * lambda) + phi_unchecked(-a * lambda),
            Gaussian { sigma2, .. } => 0.5 * sigma2 * lambda * lambda,
            Exponential { rate } => {
                let x = lambda / rate;
                if x >= 1.0 {
                    f64::INFINITY
                } else {
                    neg_log1m_minus(x)
                }
            }
            PointMass { .. } => 0.0,
            IndependentSum(ref members) => {
                return members.iter().map(|m| m.clmgf(lambda)).sum();
            }
        };
        ExtendedReal::from_f64_unchecked(v)
    }

    fn ln_clmgf(&self, lambda: f64) -> f64 {
        use Distribution::*;
        match *self {
            Poisson { a } => ln_pos(a) + ln_phi(lambda),
            Skellam { a1, a2 } => log_add(ln_pos(a1) + ln_phi(lambda), ln_pos(a2) + ln_phi(-lambda)),
            ScaledSkellam { a } => log_add(ln_phi(a * lambda), ln_phi(-a * lambda)),
            Gaussian { sigma2, .. } => {
                ln_pos(sigma2) + 2.0 * ln_pos(lambda.abs()) - std::f64::consts::LN_2
            }
            IndependentSum(ref members) => members
                .iter()
                .map(|m| m.ln_clmgf(lambda))
                .fold(f64::NEG_INFINITY, log_add),
            _ => ln_pos(self.clmgf(lambda).value()),
        }
    }

    fn variance(&self) -> f64 {
        self.moments().1
    }
}

/// `c * v` with `0 * inf = 0`.
fn scaled(c: f64, v: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * v
    }
}

fn poisson_pmf(a: f64, tail_mass: f64) -> Vec<(f64, f64)> {
    if a == 0.0 {
        return vec![(0.0, 1.0)];
    }
    // log-domain recurrence from k = 0; past the mode the remaining tail is
    // at most p_k r / (1 - r) with r = a / (k + 1)
    let mut out = Vec::new();
    let mut ln_p = -a;
    let mut k = 0u64;
    loop {
        let p = ln_p.exp();
        out.push((k as f64, p));
        let ratio = a / (k as f64 + 1.0);
        if ratio < 1.0 && p * ratio / (1.0 - ratio) < tail_mass {
            break;
        }
        k += 1;
        ln_p += a.ln() - (k as f64).ln();
        if k > 10_000_000 {
            break;
        }
    }
    out
}

fn binomial_pmf(n: u32, p: f64) -> Vec<(f64, f64)> {
    if p == 0.0 {
        return vec![(0.0, 1.0)];
    }
    if p == 1.0 {
        return vec![(n as f64, 1.0)];
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut ln_choose = 0.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            let lpk = ln_choose + k as f64 * lp + (n - k) as f64 * lq;
            (k as f64, lpk.exp())
        })
        .collect()
}

fn skellam_law(a1: f64, a2: f64, tail_mass: f64) -> Result<FiniteLaw> {
    let x1 = FiniteLaw::new(poisson_pmf(a1, tail_mass))?;
    let x2 = FiniteLaw::new(poisson_pmf(a2, tail_mass))?.map(|x| -x)?;
    x1.convolve(&x2)
}

/// Poisson draws: inversion for small means, sums of inversion draws above.
struct PoissonSampler {
    parts: u32,
    part_mean: f64,
    exp_neg: f64,
}

const POISSON_INVERSION_MAX: f64 = 30.0;

impl PoissonSampler {
    fn new(a: f64) -> Self {
        let parts = if a <= POISSON_INVERSION_MAX {
            1
        } else {
            (a / POISSON_INVERSION_MAX).ceil() as u32
        };
        let part_mean = a / parts as f64;
        PoissonSampler { parts, part_mean, exp_neg: (-part_mean).exp() }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.part_mean == 0.0 {
            return 0.0;
        }
        (0..self.parts).map(|_| self.inversion(rng)).sum::<u64>() as f64
    }

    fn inversion<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = self.exp_neg;
        let mut cum = p;
        // the cap only triggers when rounding leaves cum < u near 1
        let cap = (self.part_mean + 40.0 * self.part_mean.sqrt() + 60.0) as u64;
        while cum < u && k < cap {
            k += 1;
            p *= self.part_mean / k as f64;
            cum += p;
        }
        k
    }
}

enum Sampler {
    Bernoulli(f64),
    Binomial(Binomial),
    ScaledRademacher(f64),
    Poisson(PoissonSampler),
    Skellam(PoissonSampler, PoissonSampler, f64),
    Gaussian(Normal<f64>),
    Exponential(Exp<f64>),
    Constant(f64),
    Sum(Vec<Sampler>),
}

impl Sampler {
    fn new(d: &Distribution) -> Sampler {
        use Distribution::*;
        match *d {
            Bernoulli { p } => Sampler::Bernoulli(p),
            Binomial { n, p } => {
                Sampler::Binomial(rand_distr::Binomial::new(n as u64, p).expect("validated"))
            }
            Rademacher => Sampler::ScaledRademacher(1.0),
            ScaledRademacher { a } => Sampler::ScaledRademacher(a),
            Poisson { a } => Sampler::Poisson(PoissonSampler::new(a)),
            Skellam { a1, a2 } => {
                Sampler::Skellam(PoissonSampler::new(a1), PoissonSampler::new(a2), 1.0)
            }
            ScaledSkellam { a } => {
                Sampler::Skellam(PoissonSampler::new(1.0), PoissonSampler::new(1.0), a)
            }
            Gaussian { mu, sigma2 } => {
                Sampler::Gaussian(Normal::new(mu, sigma2.sqrt()).expect("validated"))
            }
            Exponential { rate } => Sampler::Exponential(Exp::new(rate).expect("validated")),
            PointMass { c } => Sampler::Constant(c),
            IndependentSum(ref m) => Sampler::Sum(m.iter().map(Sampler::new).collect()),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Sampler::Binomial(b) => b.sample(rng) as f64,
            Sampler::ScaledRademacher(a) => {
                if rng.random::<bool>() {
                    *a
                } else {
                    -*a
                }
            }
            Sampler::Poisson(s) => s.draw(rng),
            Sampler::Skellam(s1, s2, a) => a * (s1.draw(rng) - s2.draw(rng)),
            Sampler::Gaussian(n) => n.sample(rng),
            Sampler::Exponential(e) => e.sample(rng),
            Sampler::Constant(c) => *c,
            Sampler::Sum(parts) => parts.iter().map(|s| s.draw(rng)).sum(),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Distribution::*;
        match self {
            Bernoulli { p } => write!(f, "bernoulli({p})"),
            Binomial { n, p } => write!(f, "binomial({n},{p})"),
            Rademacher => write!(f, "rademacher"),
            ScaledRademacher { a } => write!(f, "scaledrademacher({a})"),
            Poisson { a } => write!(f, "poisson({a})"),
            Skellam { a1, a2 } => write!(f, "skellam({a1},{a2})"),
            ScaledSkellam { a } => write!(f, "scaledskellam({a})"),
            Gaussian { mu, sigma2 } => write!(f, "gaussian({mu},{sigma2})"),
            Exponential { rate } => write!(f, "exponential({rate})"),
            PointMass { c } => write!(f, "pointmass({c})"),
            IndependentSum(m) => {
                f.write_str("sum(")?;
                for (i, d) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{d}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::parse(s)
    }
}

impl Serialize for Distribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Distribution::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected distribution name"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(s.to_ascii_lowercase().replace('_', ""))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E')
        {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or(Error::Parse { pos: start, msg: format!("expected number, found {s:?}") })
    }

    fn descriptor(&mut self) -> Result<Distribution> {
        let name_pos = {
            self.skip_ws();
            self.pos
        };
        let name = self.ident()?;
        if name == "sum" {
            if !self.eat(b'(') {
                return Err(self.err("expected '(' after sum"));
            }
            let mut members = vec![self.descriptor()?];
            while self.eat(b',') {
                members.push(self.descriptor()?);
            }
            if !self.eat(b')') {
                return Err(self.err("expected ',' or ')'"));
            }
            return Ok(Distribution::IndependentSum(members));
        }
        let mut args = Vec::new();
        if self.eat(b'(') {
            if !self.eat(b')') {
                args.push(self.number()?);
                while self.eat(b',') {
                    args.push(self.number()?);
                }
                if !self.eat(b')') {
                    return Err(self.err("expected ',' or ')'"));
                }
            }
        }
        let arity = |k: usize| -> Result<()> {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::Parse {
                    pos: name_pos,
                    msg: format!("{name} takes {k} parameter(s), got {}", args.len()),
                })
            }
        };
        use Distribution::*;
        let d = match name.as_str() {
            "bernoulli" => {
                arity(1)?;
                Bernoulli { p: args[0] }
            }
            "binomial" => {
                arity(2)?;
                if args[0].fract() != 0.0 || args[0] < 1.0 || args[0] > u32::MAX as f64 {
                    return Err(Error::Parse { pos: name_pos, msg: "n must be a positive integer".into() });
                }
                Binomial { n: args[0] as u32, p: args[1] }
            }
            "rademacher" => {
                arity(0)?;
                Rademacher
            }
            "scaledrademacher" => {
                arity(1)?;
                ScaledRademacher { a: args[0] }
            }
            "poisson" => {
                arity(1)?;
                Poisson { a: args[0] }
            }
            "skellam" => {
                arity(2)?;
                Skellam { a1: args[0], a2: args[1] }
            }
            "scaledskellam" => {
                arity(1)?;
                ScaledSkellam { a: args[0] }
            }
            "gaussian" | "normal" => {
                arity(2)?;
                Gaussian { mu: args[0], sigma2: args[1] }
            }
            "exponential" => {
                arity(1)?;
                Exponential { rate: args[0] }
            }
            "pointmass" => {
                arity(1)?;
                PointMass { c: args[0] }
            }
            _ => {
                return Err(Error::Parse { pos: name_pos, msg: format!("unknown distribution {name:?}") })
            }
        };
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn d(s: &str) -> Distribution {
        Distribution::parse(s).unwrap()
    }

    #[test]
    fn clmgf_examples() {
        let v = d("poisson(2)").clmgf(1.0).value();
        assert!((v - 2.0 * (E - 2.0)).abs() < 1e-15);
        assert!(d("exponential(1)").clmgf(1.5).is_pos_infinite());
        assert!(d("exponential(1)").clmgf(1.0).is_pos_infinite());
        for s in ["bernoulli(0.3)", "skellam(3,1)", "gaussian(1,2)", "sum(poisson(1),rademacher)"] {
            assert_eq!(d(s).clmgf(0.0).value(), 0.0, "{s}");
        }
    }

    #[test]
    fn moments_examples() {
        assert_eq!(d("skellam(3,1)").moments(), (2.0, 4.0));
        assert_eq!(d("pointmass(5)").moments(), (5.0, 0.0));
        let (m, v) = d("binomial(10,0.3)").moments();
        assert!((m - 3.0).abs() < 1e-14 && (v - 2.1).abs() < 1e-14);
        assert_eq!(d("sum(poisson(1),skellam(3,1))").moments(), (3.0, 5.0));
    }

    #[test]
    fn analytic_examples() {
        let b = d("bernoulli(0.3)").analytic_proxies().unwrap();
        assert!((b.sp_two_sided.value() - 0.21).abs() < 1e-15);
        assert_eq!(b.sp_upper, b.sp_lower);
        let s = d("scaledskellam(1.5)").analytic_proxies().unwrap();
        assert!(s.sp_two_sided.is_pos_infinite());
        assert_eq!(d("pointmass(7)").analytic_proxies().unwrap().sp_two_sided.value(), 0.0);
        let e = d("exponential(2)").analytic_proxies().unwrap();
        assert!(e.sp_upper.is_pos_infinite());
        assert_eq!(e.sp_lower.value(), 0.25);
        assert!(d("sum(poisson(1),poisson(2))").analytic_proxies().is_none());
    }

    #[test]
    fn parse_round_trip_and_case() {
        for s in ["poisson(4)", "skellam(3,1)", "sum(poisson(1),bernoulli(0.2))", "rademacher"] {
            assert_eq!(d(s).to_string(), s);
        }
        assert_eq!(d("  Poisson ( 4 ) "), Distribution::Poisson { a: 4.0 });
        assert_eq!(d("rademacher()"), Distribution::Rademacher);
        assert_eq!(d("Scaled_Skellam(0.5)"), Distribution::ScaledSkellam { a: 0.5 });
    }

    #[test]
    fn parse_errors_report_position() {
        match Distribution::parse("poisson(4") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 9),
            other => panic!("{other:?}"),
        }
        match Distribution::parse("sum(poisson(1), gamma(2))") {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 16);
                assert!(msg.contains("gamma"));
            }
            other => panic!("{other:?}"),
        }
        assert!(Distribution::parse("bernoulli(1.5)").is_err());
        assert!(Distribution::parse("binomial(2.5,0.1)").is_err());
        assert!(Distribution::parse("poisson(4) x").is_err());
        assert!(Distribution::parse("poisson(1,2)").is_err());
        assert!(Distribution::parse("exponential(0)").is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = d("sum(poisson(3),gaussian(0,1))");
        let a = p.sample(100, 42).unwrap();
        let b = p.sample(100, 42).unwrap();
        assert_eq!(a.values(), b.values());
        let c = p.sample(100, 43).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn point_mass_samples() {
        let s = d("pointmass(3)").sample(5, 1).unwrap();
        assert_eq!(s.values(), &[3.0; 5]);
        assert!(d("pointmass(3)").sample(0, 1).is_err());
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        for a in [0.1, 1.0, 10.0, 100.0] {
            let law = d(&format!("poisson({a})")).finite_law(1e-15).unwrap();
            assert!((law.mean() - a).abs() < 1e-10 * a.max(1.0), "a={a}");
            assert!((law.variance() - a).abs() < 1e-8 * a.max(1.0), "a={a}");
        }
    }

    #[test]
    fn finite_law_clmgf_matches_closed_form() {
        for s in ["skellam(3,1)", "binomial(10,0.3)", "scaledskellam(0.5)", "sum(poisson(1),bernoulli(0.2))"] {
            let dist = d(s);
            let law = dist.finite_law(1e-40).unwrap();
            for l in [-2.0, -0.01, 0.5, 1.5] {
                let a = law.clmgf(l).value();
                let b = dist.clmgf(l).value();
                assert!(((a - b) / b).abs() < 1e-9, "{s} lambda={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ln_clmgf_consistent() {
        for s in ["poisson(2)", "skellam(3,1)", "scaledskellam(0.7)", "gaussian(0,2)", "sum(poisson(1),gaussian(0,1))"] {
            let dist = d(s);
            for l in [-3.0, 0.2, 5.0] {
                let a = dist.ln_clmgf(l);
                let b = dist.clmgf(l).value().ln();
                assert!((a - b).abs() < 1e-12, "{s} {l}");
            }
        }
        assert!((d("poisson(1)").ln_clmgf(1000.0) - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_clmgf_small_argument() {
        let x: f64 = 1e-7;
        let v = d("exponential(1)").clmgf(x).value();
        assert!(((v - (x * x / 2.0 + x * x * x / 3.0)) / v).abs() < 1e-14);
    }
}
