//! Orlicz `psi_p` norms of centered catalog members and the two bridges
//! between them and sub-Poisson proxies:
//!
//! * `sigma2_SP <= log 2 * ||X||_psi2^2` for centered `X`;
//! * `||X||_psi1 <= 4 min(1 / W(1 / sigma), 1 / W(1 / sigma^2))` for centered
//!   `X` with proxy `sigma^2 > 0`.
//!
//! Norms are found by bisection on `K -> E exp((|X - E X| / K)^p)`, which is
//! decreasing in `K`. Expectations are exact sums for discrete members and
//! adaptive Gauss-Kronrod quadrature for the Gaussian and exponential parts.

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::mgf::FiniteLaw;
use crate::special::lambert_w0;

/// Sharp constants relating `sigma_SG` and `||X||_psi2` for centered `X`:
/// `SG_LOWER * psi2 <= sigma_SG <= SG_UPPER * psi2`.
pub const SG_PSI2_LOWER: f64 = 0.612_372_435_695_794_5; // sqrt(3/8)
pub const SG_PSI2_UPPER: f64 = 0.832_554_611_157_697_7; // sqrt(ln 2)

/// Discrete supports are truncated where the remaining mass drops below this.
const TAIL_MASS: f64 = 1e-40;
const QUAD_ABS_TOL: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrliczMethod {
    ClosedForm,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrliczNorm {
    pub p: f64,
    pub value: ExtendedReal,
    pub method: OrliczMethod,
}

/// Continuous component of a centered law.
#[derive(Debug, Clone, Copy)]
enum Continuous {
    Gaussian { sigma2: f64 },
    /// `E - 1/rate` with `E ~ Exp(rate)`.
    Exponential { rate: f64 },
}

/// `X - E X` as a discrete part plus an independent continuous part.
struct CenteredLaw {
    atoms: FiniteLaw,
    continuous: Option<Continuous>,
    /// The discrete part has unbounded support (Poisson-type tails).
    unbounded_atoms: bool,
}

fn flatten<'a>(d: &'a Distribution, out: &mut Vec<&'a Distribution>) {
    match d {
        Distribution::IndependentSum(m) => m.iter().for_each(|x| flatten(x, out)),
        other => out.push(other),
    }
}

fn has_unbounded_support(d: &Distribution) -> bool {
    match *d {
        Distribution::Poisson { a } | Distribution::ScaledSkellam { a } => a > 0.0,
        Distribution::Skellam { a1, a2 } => a1 > 0.0 || a2 > 0.0,
        _ => false,
    }
}

impl CenteredLaw {
    fn new(d: &Distribution) -> Result<Self> {
        d.validate()?;
        let mut members = Vec::new();
        flatten(d, &mut members);
        let mut atoms = FiniteLaw::new([(0.0, 1.0)])?;
        let mut gauss = 0.0;
        let mut exp_rate: Option<f64> = None;
        let mut unbounded_atoms = false;
        for m in members {
            match *m {
                Distribution::Gaussian { sigma2, .. } => gauss += sigma2,
                Distribution::Exponential { rate } => {
                    if exp_rate.replace(rate).is_some() {
                        return Err(Error::Unsupported(
                            "Orlicz norm of a sum with several exponential terms".into(),
                        ));
                    }
                }
                _ => {
                    unbounded_atoms |= has_unbounded_support(m);
                    let law = m.finite_law(TAIL_MASS).expect("discrete member");
                    atoms = atoms.convolve(&law)?;
                }
            }
        }
        let continuous = match (gauss > 0.0, exp_rate) {
            (true, Some(_)) => {
                return Err(Error::Unsupported(
                    "Orlicz norm of a Gaussian plus exponential sum".into(),
                ))
            }
            (true, None) => Some(Continuous::Gaussian { sigma2: gauss }),
            (false, Some(rate)) => Some(Continuous::Exponential { rate }),
            (false, None) => None,
        };
        let m = atoms.mean();
        let atoms = atoms.map(|x| x - m)?;
        Ok(CenteredLaw { atoms, continuous, unbounded_atoms })
    }

    fn variance(&self) -> f64 {
        let v: f64 = self.atoms.atoms().map(|(x, p)| p * x * x).sum();
        v + match self.continuous {
            Some(Continuous::Gaussian { sigma2 }) => sigma2,
            Some(Continuous::Exponential { rate }) => 1.0 / (rate * rate),
            None => 0.0,
        }
    }

    /// Whether `E exp((|X|/K)^p)` is finite.
    fn finite_at(&self, k: f64, p: f64) -> bool {
        if self.unbounded_atoms && p > 1.0 {
            return false;
        }
        match self.continuous {
            None => true,
            Some(Continuous::Gaussian { sigma2 }) => p < 2.0 || (p == 2.0 && k * k > 2.0 * sigma2),
            Some(Continuous::Exponential { rate }) => p < 1.0 || (p == 1.0 && 1.0 / k < rate),
        }
    }

    /// `E exp((|X|/K)^p)`; `+inf` when infinite or beyond `exp(700)`.
    fn objective(&self, k: f64, p: f64) -> f64 {
        if !self.finite_at(k, p) {
            return f64::INFINITY;
        }
        match self.continuous {
            None => {
                let terms: Vec<f64> = self
                    .atoms
                    .atoms()
                    .map(|(x, w)| w.ln() + (x.abs() / k).powf(p))
                    .collect();
                log_sum_exp(&terms).map_or(f64::INFINITY, f64::exp)
            }
            Some(c) => {
                let mut acc = 0.0;
                for (s, w) in self.atoms.atoms() {
                    let v = continuous_expectation(c, s, k, p);
                    if !v.is_finite() {
                        return f64::INFINITY;
                    }
                    acc += w * v;
                }
                acc
            }
        }
    }
}

/// `log sum exp(t_i)`, or `None` when it exceeds 700.
fn log_sum_exp(terms: &[f64]) -> Option<f64> {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m > 700.0 {
        return None;
    }
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    let v = m + s.ln();
    (v <= 700.0).then_some(v)
}

/// `E exp((|s + C| / K)^p)` for the centered continuous component `C`.
fn continuous_expectation(c: Continuous, s: f64, k: f64, p: f64) -> f64 {
    match c {
        Continuous::Gaussian { sigma2 } => {
            let sd = sigma2.sqrt();
            let norm = (2.0 * std::f64::consts::PI * sigma2).sqrt();
            // exponent in terms of u = s + z
            let g = move |u: f64| (u.abs() / k).powf(p) - (u - s) * (u - s) / (2.0 * sigma2);
            integrate_log_density(g, f64::NEG_INFINITY, f64::INFINITY, &[0.0, s], sd) / norm
        }
        Continuous::Exponential { rate } => {
            let m = 1.0 / rate;
            // u = s + e - m with e >= 0 distributed Exp(rate)
            let g = move |u: f64| (u.abs() / k).powf(p) - rate * (u - s + m);
            rate * integrate_log_density(g, s - m, f64::INFINITY, &[0.0], m)
        }
    }
}

/// `int_a^b exp(g(u)) du` for a log-integrand that decays to `-inf` at the
/// infinite ends. `breaks` are interior kinks or modes; `scale` sets the
/// initial truncation width. Returns `+inf` once the integral exceeds `e^700`.
fn integrate_log_density(
    g: impl Fn(f64) -> f64 + Copy,
    a: f64,
    b: f64,
    breaks: &[f64],
    scale: f64,
) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    pts.sort_by(f64::total_cmp);
    let center = if pts.is_empty() { if a.is_finite() { a } else { 0.0 } } else { pts[0] };
    let gref = {
        // reference level: max of g over a coarse scan
        let lo = if a.is_finite() { a } else { center - 40.0 * scale };
        let hi = if b.is_finite() { b } else { center + 40.0 * scale };
        (0..=400)
            .map(|i| g(lo + (hi - lo) * i as f64 / 400.0))
            .chain(pts.iter().map(|&x| g(x)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    if gref > 700.0 {
        return f64::INFINITY;
    }
    let f = move |u: f64| (g(u) - gref).exp();
    let cutoff = gref - 90.0;
    let left = if a.is_finite() {
        a
    } else {
        let mut r = pts.first().copied().unwrap_or(center) - scale;
        let mut step = scale;
        while g(r) > cutoff {
            step *= 2.0;
            r -= step;
        }
        r
    };
    let right = if b.is_finite() {
        b
    } else {
        let mut r = pts.last().copied().unwrap_or(center) + scale;
        let mut step = scale;
        while g(r) > cutoff {
            step *= 2.0;
            r += step;
        }
        r
    };
    let mut edges = vec![left];
    edges.extend(pts.iter().copied().filter(|x| *x > left && *x < right));
    edges.push(right);
    let total: f64 = edges
        .windows(2)
        .map(|w| gauss_kronrod_adaptive(&f, w[0], w[1], QUAD_ABS_TOL * (-gref).exp().min(1.0), 40))
        .sum();
    let v = total.ln() + gref;
    if v > 700.0 {
        f64::INFINITY
    } else {
        v.exp()
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod / 7-point Gauss pair on `[a, b]`: `(kronrod, |kronrod - gauss|)`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS_K[7] * fc;
    let mut g = GK_WEIGHTS_G[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WEIGHTS_K[i] * s;
        if i % 2 == 1 {
            g += GK_WEIGHTS_G[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn gauss_kronrod_adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth == 0 || (b - a).abs() < 1e-14 * a.abs().max(1.0) {
        return k;
    }
    let m = 0.5 * (a + b);
    gauss_kronrod_adaptive(f, a, m, 0.5 * tol, depth - 1)
        + gauss_kronrod_adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// `||X - E X||_psi_p` for a catalog member.
pub fn psi_norm(d: &Distribution, p: f64) -> Result<OrliczNorm> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain("psi_norm", format!("p = {p}; need finite p >= 1")));
    }
    let law = CenteredLaw::new(d)?;
    if law.variance() == 0.0 {
        return Ok(OrliczNorm { p, value: ExtendedReal::ZERO, method: OrliczMethod::ClosedForm });
    }
    let inf = OrliczNorm { p, value: ExtendedReal::INFINITY, method: OrliczMethod::Bisection };

    let mut hi = law.variance().sqrt();
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut eval = |k: f64| {
        let v = law.objective(k, p);
        trace.push((k, v));
        v
    };
    let mut doublings = 0;
    while eval(hi) > 2.0 {
        if doublings == MAX_DOUBLINGS {
            return Ok(inf);
        }
        hi *= 2.0;
        doublings += 1;
    }
    // lower bracket: an atom with mass w at distance x alone exceeds 2 once
    // K < x / log(2 / w)^(1/p)
    let markov = law
        .atoms
        .atoms()
        .filter(|(x, _)| *x != 0.0)
        .map(|(x, w)| x.abs() / (2.0 / w).ln().powf(1.0 / p))
        .fold(0.0f64, f64::max);
    let mut lo = if markov > 0.0 && markov < hi { markov * (1.0 - 1e-12) } else { 0.5 * hi };
    while eval(lo) <= 2.0 {
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(is_monotone(&trace), "Orlicz objective not decreasing in K");
    Ok(OrliczNorm { p, value: ExtendedReal::from_f64_unchecked(hi), method: OrliczMethod::Bisection })
}

/// Finite evaluations of the objective are nonincreasing in `K` (up to
/// quadrature noise).
fn is_monotone(trace: &[(f64, f64)]) -> bool {
    let mut t: Vec<(f64, f64)> = trace.iter().copied().filter(|x| x.1.is_finite()).collect();
    t.sort_by(|a, b| a.0.total_cmp(&b.0));
    t.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-12)
}

/// `E exp((|X - E X| / K)^p)` for inspection and testing; `+inf` when the
/// expectation is infinite or astronomically large.
pub fn orlicz_objective(d: &Distribution, k: f64, p: f64) -> Result<f64> {
    if !(k > 0.0) || !(p >= 1.0) {
        return Err(Error::domain("orlicz_objective", format!("need K > 0 and p >= 1, got K = {k}, p = {p}")));
    }
    Ok(CenteredLaw::new(d)?.objective(k, p))
}

/// `4 min(1 / W(1 / sigma), 1 / W(1 / sigma^2))`, a bound on `||X||_psi1`
/// for centered `X` with sub-Poisson proxy `sigma^2 > 0`.
pub fn psi1_bound_from_proxy(sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::domain(
            "psi1_bound_from_proxy",
            format!("sigma2 = {sigma2}; need sigma2 > 0 (sigma2 = 0 means X is constant and the norm is 0)"),
        ));
    }
    let a = 1.0 / lambert_w0(1.0 / sigma2.sqrt())?;
    let b = 1.0 / lambert_w0(1.0 / sigma2)?;
    Ok(4.0 * a.min(b))
}

/// `log 2 * psi2^2`, a bound on the sub-Poisson proxy of a centered variable.
pub fn proxy_bound_from_psi2(psi2: f64) -> Result<f64> {
    if psi2.is_nan() || psi2 < 0.0 {
        return Err(Error::domain("proxy_bound_from_psi2", format!("psi2 = {psi2} < 0")));
    }
    Ok(std::f64::consts::LN_2 * psi2 * psi2)
}
