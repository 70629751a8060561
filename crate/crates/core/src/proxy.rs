//! Optimal variance proxies.
//!
//! The optimal upper proxy is `sup_{lambda > 0} clmgf(lambda) / phi(lambda)`,
//! the lower proxy is the upper proxy of `-X`, and the two-sided proxy is the
//! larger of the two. The supremum is located on a log-spaced grid that is
//! extended to the right while the ratio is still near its running maximum,
//! then polished by golden-section search. The `lambda -> 0` limit of the
//! ratio is the variance and enters as a candidate without any division.
//!
//! The same machinery computes sub-Gaussian proxies when the denominator is
//! switched to `lambda^2 / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::mgf::{CenteredLogMgf, Negated};
use crate::special::{ln_phi, phi_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
    TwoSided,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
            Side::TwoSided => "two_sided",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "upper" => Ok(Side::Upper),
            "lower" => Ok(Side::Lower),
            "two_sided" | "two-sided" | "both" => Ok(Side::TwoSided),
            _ => Err(Error::argument(format!("unknown side {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Numeric,
}

/// Denominator of the proxy ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `phi(|lambda|)`: sub-Poisson proxies.
    PhiAbs,
    /// `lambda^2 / 2`: sub-Gaussian proxies.
    HalfLambdaSquared,
}

impl Denominator {
    fn eval(self, lambda: f64) -> f64 {
        match self {
            Denominator::PhiAbs => phi_unchecked(lambda.abs()),
            Denominator::HalfLambdaSquared => 0.5 * lambda * lambda,
        }
    }

    fn ln_eval(self, lambda: f64) -> f64 {
        match self {
            Denominator::PhiAbs => ln_phi(lambda.abs()),
            Denominator::HalfLambdaSquared => 2.0 * lambda.abs().ln() - std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative tolerance on the proxy value.
    pub tol: f64,
    pub grid_per_decade: usize,
    pub lambda_min: f64,
    /// Initial right end of the grid.
    pub lambda_max: f64,
    /// How many times the right end may be doubled.
    pub max_doublings: u32,
    /// Ratio level above which a still-increasing ratio counts as divergent.
    pub divergence_cap: f64,
    pub denominator: Denominator,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            grid_per_decade: 200,
            lambda_min: 1e-6,
            lambda_max: 50.0,
            max_doublings: 10,
            divergence_cap: 1e12,
            denominator: Denominator::PhiAbs,
        }
    }
}

impl SolverOptions {
    pub fn sub_gaussian() -> Self {
        SolverOptions { denominator: Denominator::HalfLambdaSquared, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.tol < 1.0
            && self.grid_per_decade >= 1
            && self.lambda_min > 0.0
            && self.lambda_max.is_finite()
            && self.lambda_max > self.lambda_min
            && self.max_doublings <= 60
            && self.divergence_cap > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::argument(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub grid_size: usize,
    /// Golden-section iterations spent on the final refinement.
    pub refinement_depth: usize,
    pub divergent: bool,
    /// The `lambda -> 0` limit of the ratio (the variance).
    pub limit_value: f64,
    /// Right end of the grid after doubling.
    pub lambda_max_reached: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyResult {
    pub side: Side,
    pub value: ExtendedReal,
    /// Maximising `lambda`, signed (negative for the lower tail). `None` when
    /// the supremum is the `lambda -> 0` limit or the proxy diverges.
    pub argmax_lambda: Option<f64>,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// `clmgf(lambda) / denominator(lambda)` for `lambda != 0`.
pub fn ratio_with<P: CenteredLogMgf + ?Sized>(
    p: &P,
    lambda: f64,
    denominator: Denominator,
) -> Result<ExtendedReal> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::domain(
            "ratio",
            format!("lambda = {lambda}; use ratio_limit_at_zero for the limit"),
        ));
    }
    Ok(ExtendedReal::from_f64_unchecked(raw_ratio(p, lambda, denominator)))
}

/// `clmgf(lambda) / phi(|lambda|)` for `lambda != 0`.
pub fn ratio<P: CenteredLogMgf + ?Sized>(p: &P, lambda: f64) -> Result<ExtendedReal> {
    ratio_with(p, lambda, Denominator::PhiAbs)
}

/// Limit of the ratio as `lambda -> 0`, which equals `Var(X)`.
pub fn ratio_limit_at_zero<P: CenteredLogMgf + ?Sized>(p: &P) -> f64 {
    p.variance()
}

fn raw_ratio<P: CenteredLogMgf + ?Sized>(p: &P, lambda: f64, den: Denominator) -> f64 {
    let c = p.clmgf(lambda).value();
    let d = den.eval(lambda);
    if c.is_finite() && d.is_finite() && d > 0.0 {
        return c / d;
    }
    let ln_c = p.ln_clmgf(lambda);
    if ln_c == f64::INFINITY {
        return f64::INFINITY;
    }
    if ln_c == f64::NEG_INFINITY {
        return 0.0;
    }
    (ln_c - den.ln_eval(lambda)).exp()
}

/// True when the MGF itself is infinite at `lambda` (not a float overflow).
fn mgf_diverges<P: CenteredLogMgf + ?Sized>(p: &P, lambda: f64) -> bool {
    p.clmgf(lambda).is_pos_infinite() && p.ln_clmgf(lambda) == f64::INFINITY
}

fn log_grid(from: f64, to: f64, per_decade: usize, include_start: bool) -> Vec<f64> {
    let decades = (to / from).log10();
    let steps = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (l0, l1) = (from.ln(), to.ln());
    let first = if include_start { 0 } else { 1 };
    (first..=steps)
        .map(|i| {
            if i == steps {
                to
            } else {
                (l0 + (l1 - l0) * i as f64 / steps as f64).exp()
            }
        })
        .collect()
}

/// Maximises `f` on `[a, b]` by golden-section search until the bracket is
/// narrower than `rel_tol * b`. Returns `(x, f(x), iterations)`.
pub(crate) fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    rel_tol: f64,
    max_iter: usize,
) -> (f64, f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a) > rel_tol * b.abs().max(f64::MIN_POSITIVE) && iters < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    if fc >= fd {
        (c, fc, iters)
    } else {
        (d, fd, iters)
    }
}

/// Upper-tail supremum of the ratio for `p`.
fn sup_positive<P: CenteredLogMgf + ?Sized>(p: &P, opts: &SolverOptions, side: Side) -> ProxyResult {
    let den = opts.denominator;
    let limit = p.variance().max(0.0);
    let mut lambdas = log_grid(opts.lambda_min, opts.lambda_max, opts.grid_per_decade, true);
    let mut values: Vec<f64> = Vec::with_capacity(lambdas.len());

    let diverged = |grid_size: usize, lmax: f64| ProxyResult {
        side,
        value: ExtendedReal::INFINITY,
        argmax_lambda: None,
        method: Method::Numeric,
        diagnostics: Diagnostics {
            grid_size,
            refinement_depth: 0,
            divergent: true,
            limit_value: limit,
            lambda_max_reached: lmax,
        },
    };

    for &l in &lambdas {
        if mgf_diverges(p, l) {
            return diverged(values.len() + 1, l);
        }
        values.push(raw_ratio(p, l, den));
    }

    let mut running_sup = values.iter().copied().fold(limit, f64::max);
    let mut lmax = opts.lambda_max;
    let mut at_end = vec![*values.last().expect("nonempty grid")];
    for _ in 0..opts.max_doublings {
        let end_ratio = *at_end.last().unwrap();
        if end_ratio < 0.999 * running_sup {
            break;
        }
        let ext = log_grid(lmax, 2.0 * lmax, opts.grid_per_decade, false);
        for &l in &ext {
            if mgf_diverges(p, l) {
                return diverged(values.len() + 1, l);
            }
            let r = raw_ratio(p, l, den);
            running_sup = running_sup.max(r);
            values.push(r);
        }
        lambdas.extend(ext);
        lmax *= 2.0;
        at_end.push(*values.last().unwrap());
        let k = at_end.len();
        if k >= 4 {
            let last = &at_end[k - 4..];
            let increasing = last.windows(2).all(|w| w[1] > w[0]);
            if increasing && last[3] > opts.divergence_cap {
                return diverged(values.len(), lmax);
            }
        }
        if end_ratio == f64::INFINITY {
            return diverged(values.len(), lmax);
        }
    }

    let (best_idx, best_grid) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });

    let mut value = limit;
    let mut argmax = None;
    let mut depth = 0;
    if best_grid > limit {
        let lo = lambdas[best_idx.saturating_sub(1)];
        let hi = lambdas[(best_idx + 1).min(lambdas.len() - 1)];
        let (x, fx, iters) = golden_section_max(|l| raw_ratio(p, l, den), lo, hi, 1e-10, 200);
        depth = iters;
        let (x, fx) = if fx >= best_grid { (x, fx) } else { (lambdas[best_idx], best_grid) };
        value = fx;
        argmax = Some(x);
    }

    ProxyResult {
        side,
        value: ExtendedReal::from_f64_unchecked(value),
        argmax_lambda: argmax,
        method: Method::Numeric,
        diagnostics: Diagnostics {
            grid_size: values.len(),
            refinement_depth: depth,
            divergent: false,
            limit_value: limit,
            lambda_max_reached: lmax,
        },
    }
}

/// Computes the optimal proxy of the requested side numerically.
pub fn optimal_proxy<P: CenteredLogMgf + ?Sized>(
    p: &P,
    side: Side,
    opts: &SolverOptions,
) -> Result<ProxyResult> {
    opts.validate()?;
    Ok(match side {
        Side::Upper => sup_positive(p, opts, Side::Upper),
        Side::Lower => {
            let mut r = sup_positive(&Negated(p), opts, Side::Lower);
            r.argmax_lambda = r.argmax_lambda.map(|l| -l);
            r
        }
        Side::TwoSided => {
            let up = optimal_proxy(p, Side::Upper, opts)?;
            let lo = optimal_proxy(p, Side::Lower, opts)?;
            let winner = if up.value >= lo.value { up } else { lo };
            ProxyResult {
                side: Side::TwoSided,
                value: up.value.max(lo.value),
                argmax_lambda: winner.argmax_lambda,
                method: Method::Numeric,
                diagnostics: Diagnostics {
                    grid_size: up.diagnostics.grid_size + lo.diagnostics.grid_size,
                    refinement_depth: up.diagnostics.refinement_depth
                        + lo.diagnostics.refinement_depth,
                    divergent: up.diagnostics.divergent || lo.diagnostics.divergent,
                    limit_value: up.diagnostics.limit_value,
                    lambda_max_reached: up
                        .diagnostics
                        .lambda_max_reached
                        .max(lo.diagnostics.lambda_max_reached),
                },
            }
        }
    })
}

/// Outcome of a pointwise MGF dominance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub side: Side,
    pub sigma2: f64,
    pub pass: bool,
    /// `min over the grid of sigma2 * phi(lambda) - clmgf(+-lambda)`.
    pub worst_margin: ExtendedReal,
    pub worst_lambda: f64,
    pub points: usize,
}

/// Checks `clmgf(lambda) <= sigma2 * phi(lambda)` for `lambda` in the grid
/// (upper), the same for `-lambda` (lower), or both.
///
/// Grid entries must be positive. A point passes when the margin is at least
/// `-1e-12` relative to `sigma2 * phi(lambda)`, which absorbs rounding when the
/// two sides agree exactly.
pub fn mgf_dominance_check<P: CenteredLogMgf + ?Sized>(
    p: &P,
    sigma2: f64,
    side: Side,
    lambda_grid: &[f64],
) -> Result<DominanceReport> {
    if !(sigma2 >= 0.0) {
        return Err(Error::domain("mgf_dominance_check", format!("sigma2 = {sigma2} < 0")));
    }
    if lambda_grid.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::argument("dominance grid must contain positive finite lambdas"));
    }
    let signs: &[f64] = match side {
        Side::Upper => &[1.0],
        Side::Lower => &[-1.0],
        Side::TwoSided => &[1.0, -1.0],
    };
    let mut pass = true;
    let mut worst = f64::INFINITY;
    let mut worst_lambda = f64::NAN;
    for &l in lambda_grid {
        let rhs = sigma2 * phi_unchecked(l);
        for &s in signs {
            let lhs = p.clmgf(s * l).value();
            let margin = if lhs == f64::INFINITY && rhs == f64::INFINITY {
                0.0
            } else {
                rhs - lhs
            };
            if margin < -1e-12 * rhs.max(f64::MIN_POSITIVE) {
                pass = false;
            }
            if margin < worst || worst_lambda.is_nan() {
                worst = margin;
                worst_lambda = s * l;
            }
        }
    }
    Ok(DominanceReport {
        side,
        sigma2,
        pass,
        worst_margin: ExtendedReal::from_f64_unchecked(if worst.is_nan() { 0.0 } else { worst }),
        worst_lambda,
        points: lambda_grid.len() * signs.len(),
    })
}

/// A log-spaced grid from `from` to `to` with `per_decade` points per decade.
pub fn lambda_grid(from: f64, to: f64, per_decade: usize) -> Vec<f64> {
    log_grid(from, to, per_decade, true)
}
