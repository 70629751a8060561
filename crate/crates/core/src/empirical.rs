//! Sample-based estimates and Monte-Carlo verification.
//!
//! Random numbers come from ChaCha20 seeded with `seed_from_u64(seed)`.
//! Monte-Carlo runs are split into shards of [`SHARD_SIZE`] draws; shard `i`
//! uses stream `i` of the same seed, so reports depend only on
//! `(descriptor, n, seed)` and not on the number of worker threads.

use std::path::Path;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{tail_bound, BoundKind};
use crate::closure::{
    cert_abs, cert_bounded_multiplier, cert_convex, cert_scale, cert_sum, ProxyCertificate,
};
use crate::distributions::{catalog, Distribution};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::mgf::{deviation_range, weighted_centered_lmgf, CenteredLogMgf, Negated, ScaleMixture};
use crate::orlicz::{proxy_bound_from_psi2, psi1_bound_from_proxy, psi_norm};
use crate::proxy::{
    golden_section_max, lambda_grid, mgf_dominance_check, optimal_proxy, Diagnostics, Method,
    ProxyResult, Side, SolverOptions,
};
use crate::special::phi_unchecked;

/// Draws per Monte-Carlo shard.
pub const SHARD_SIZE: usize = 1 << 16;

/// Largest admissible `|lambda (x - mean)|` for the empirical MGF.
const EXP_GUARD: f64 = 700.0;

/// A nonempty set of finite observations with its provenance.
#[derive(Debug, Clone)]
pub struct SampleSet {
    values: Vec<f64>,
    seed: u64,
    source: String,
    law: OnceLock<EmpiricalLaw>,
}

impl PartialEq for SampleSet {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.seed == other.seed && self.source == other.source
    }
}

/// The empirical law with equal observations merged.
#[derive(Debug, Clone)]
struct EmpiricalLaw {
    deviations: Vec<f64>,
    weights: Vec<f64>,
    mean: f64,
    range: (f64, f64),
    max_abs: f64,
    variance: f64,
}

impl EmpiricalLaw {
    fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut uniq: Vec<(f64, f64)> = Vec::new();
        for x in sorted {
            match uniq.last_mut() {
                Some((v, c)) if *v == x => *c += 1.0,
                _ => uniq.push((x, 1.0)),
            }
        }
        let weights: Vec<f64> = uniq.iter().map(|(_, c)| c / n).collect();
        let (lo, hi) = (uniq[0].0, uniq[uniq.len() - 1].0);
        // a single distinct value is its own mean, exactly
        let mean = if uniq.len() == 1 {
            lo
        } else {
            uniq.iter().zip(&weights).map(|((x, _), w)| w * x).sum::<f64>().clamp(lo, hi)
        };
        let deviations: Vec<f64> = uniq.iter().map(|(x, _)| x - mean).collect();
        let range = deviation_range(&deviations);
        let max_abs = range.0.abs().max(range.1.abs());
        let variance = deviations.iter().zip(&weights).map(|(d, w)| w * d * d).sum();
        EmpiricalLaw { deviations, weights, mean, range, max_abs, variance }
    }
}

impl CenteredLogMgf for EmpiricalLaw {
    fn clmgf(&self, lambda: f64) -> ExtendedReal {
        let v = weighted_centered_lmgf(&self.deviations, self.range, |i| self.weights[i], lambda);
        ExtendedReal::from_f64_unchecked(v)
    }

    fn variance(&self) -> f64 {
        self.variance
    }
}

impl SampleSet {
    pub fn new(values: Vec<f64>, seed: u64, source: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("sample set is empty"));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::argument(format!("sample value {i} is not finite: {}", values[i])));
        }
        Ok(SampleSet { values, seed, source: source.into(), law: OnceLock::new() })
    }

    /// One value per line; blank lines and lines starting with `#` are skipped.
    pub fn from_text(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let x: f64 = line
                .parse()
                .map_err(|_| Error::argument(format!("line {}: not a number: {line:?}", i + 1)))?;
            values.push(x);
        }
        Self::new(values, 0, source)
    }

    /// A column of CSV data with a header row, selected by header name or
    /// zero-based index.
    pub fn from_csv(text: &str, column: &str, source: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::argument(format!("csv header: {e}")))?;
        let idx = match headers.iter().position(|h| h == column) {
            Some(i) => i,
            None => column
                .parse::<usize>()
                .ok()
                .filter(|i| *i < headers.len())
                .ok_or_else(|| Error::argument(format!("csv has no column {column:?}")))?,
        };
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::argument(format!("csv row {}: {e}", row + 2)))?;
            let cell = rec
                .get(idx)
                .ok_or_else(|| Error::argument(format!("csv row {} has no column {idx}", row + 2)))?;
            let x: f64 = cell
                .parse()
                .map_err(|_| Error::argument(format!("csv row {}: not a number: {cell:?}", row + 2)))?;
            values.push(x);
        }
        Self::new(values, 0, source)
    }

    /// Reads a sample file: CSV when `column` is given or the extension is
    /// `.csv` (first column by default), one value per line otherwise.
    pub fn load(path: &Path, column: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let source = path.display().to_string();
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        match column {
            Some(c) => Self::from_csv(&text, c, source),
            None if is_csv => Self::from_csv(&text, "0", source),
            None => Self::from_text(&text, source),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn law(&self) -> &EmpiricalLaw {
        self.law.get_or_init(|| EmpiricalLaw::new(&self.values))
    }

    pub fn mean(&self) -> f64 {
        self.law().mean
    }

    /// Plug-in variance (divisor `n`).
    pub fn variance(&self) -> f64 {
        self.law().variance
    }

    /// `max |x_i - mean|`.
    pub fn max_abs_deviation(&self) -> f64 {
        self.law().max_abs
    }

    /// Admissible `lambda` range `[-700 / m, 700 / m]` with `m` the largest
    /// absolute deviation; the whole real line for constant samples.
    pub fn lambda_guard(&self) -> f64 {
        let m = self.max_abs_deviation();
        if m == 0.0 {
            f64::INFINITY
        } else {
            EXP_GUARD / m
        }
    }
}

/// `log (1/n) sum exp(lambda (x_i - mean))`.
pub fn empirical_clmgf(s: &SampleSet, lambda: f64) -> Result<f64> {
    let g = s.lambda_guard();
    if !(lambda.abs() <= g) {
        return Err(Error::Range {
            msg: format!("lambda = {lambda} overflows the empirical MGF"),
            low: -g,
            high: g,
        });
    }
    Ok(s.law().clmgf(lambda).value())
}

/// A sample-based proxy. This is a heuristic estimate with no optimality
/// guarantee: beyond `lambda ~ log(n) / max|x - mean|` the plug-in MGF is
/// dominated by the sample maximum, so the default range stops there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalProxy {
    pub result: ProxyResult,
    /// Always true; the value is an estimate, not a certified proxy.
    pub estimate: bool,
    pub lambda_range: (f64, f64),
    pub sample_size: usize,
}

/// Default `lambda` range: `[1e-4 c, c]` with `c = log(n) / max|x - mean|`.
pub fn default_lambda_range(s: &SampleSet) -> Option<(f64, f64)> {
    let m = s.max_abs_deviation();
    if m == 0.0 {
        return None;
    }
    let hi = ((s.len() as f64).ln().max(1.0) / m).min(EXP_GUARD / m);
    Some((1e-4 * hi, hi))
}

pub fn empirical_proxy(
    s: &SampleSet,
    side: Side,
    lambda_range: Option<(f64, f64)>,
) -> Result<EmpiricalProxy> {
    let guard = s.lambda_guard();
    let range = match lambda_range {
        Some((lo, hi)) => {
            if !(lo > 0.0 && lo < hi && hi <= guard) {
                return Err(Error::Range {
                    msg: format!("lambda range [{lo}, {hi}] invalid for this sample"),
                    low: 0.0,
                    high: guard,
                });
            }
            Some((lo, hi))
        }
        None => default_lambda_range(s),
    };
    let law = s.law();
    let result = match range {
        None => degenerate_result(side),
        Some((lo, hi)) => match side {
            Side::Upper => grid_sup(law, lo, hi, Side::Upper),
            Side::Lower => {
                let mut r = grid_sup(&Negated(law), lo, hi, Side::Lower);
                r.argmax_lambda = r.argmax_lambda.map(|l| -l);
                r
            }
            Side::TwoSided => {
                let up = grid_sup(law, lo, hi, Side::Upper);
                let mut down = grid_sup(&Negated(law), lo, hi, Side::Lower);
                down.argmax_lambda = down.argmax_lambda.map(|l| -l);
                let mut r = if up.value >= down.value { up } else { down };
                r.side = Side::TwoSided;
                r
            }
        },
    };
    let (lo, hi) = range.unwrap_or((0.0, 0.0));
    Ok(EmpiricalProxy { result, estimate: true, lambda_range: (lo, hi), sample_size: s.len() })
}

fn degenerate_result(side: Side) -> ProxyResult {
    ProxyResult {
        side,
        value: ExtendedReal::ZERO,
        argmax_lambda: None,
        method: Method::Numeric,
        diagnostics: Diagnostics {
            grid_size: 0,
            refinement_depth: 0,
            divergent: false,
            limit_value: 0.0,
            lambda_max_reached: 0.0,
        },
    }
}

fn grid_sup<P: CenteredLogMgf>(p: &P, lo: f64, hi: f64, side: Side) -> ProxyResult {
    let ratio = |l: f64| p.clmgf(l).value() / phi_unchecked(l);
    let grid = lambda_grid(lo, hi, 50);
    let values: Vec<f64> = grid.iter().map(|&l| ratio(l)).collect();
    let limit = p.variance();
    let (i, best) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let mut value = limit;
    let mut argmax = None;
    let mut depth = 0;
    if best > limit {
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let (x, fx, iters) = golden_section_max(ratio, a, b, 1e-10, 200);
        depth = iters;
        let (x, fx) = if fx >= best { (x, fx) } else { (grid[i], best) };
        value = fx;
        argmax = Some(x);
    }
    ProxyResult {
        side,
        value: ExtendedReal::from_f64_unchecked(value),
        argmax_lambda: argmax,
        method: Method::Numeric,
        diagnostics: Diagnostics {
            grid_size: grid.len(),
            refinement_depth: depth,
            divergent: false,
            limit_value: limit,
            lambda_max_reached: hi,
        },
    }
}

/// One checked inequality `observed <= bound` (up to `tolerance`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckPoint {
    pub check: String,
    pub citation: String,
    pub subject: String,
    /// Grid coordinate (`t`, `lambda`, a scale factor), if any.
    pub parameter: Option<f64>,
    pub observed: ExtendedReal,
    pub bound: ExtendedReal,
    pub tolerance: f64,
    /// `bound - observed`.
    pub margin: ExtendedReal,
    pub pass: bool,
}

impl CheckPoint {
    pub fn new(
        check: &str,
        citation: &str,
        subject: impl Into<String>,
        parameter: Option<f64>,
        observed: ExtendedReal,
        bound: ExtendedReal,
        tolerance: f64,
    ) -> Self {
        let margin = match (bound.is_pos_infinite(), observed.is_pos_infinite()) {
            (true, true) => ExtendedReal::ZERO,
            (true, false) => ExtendedReal::INFINITY,
            (false, true) => ExtendedReal::NEG_INFINITY,
            (false, false) => ExtendedReal::from_f64_unchecked(bound.value() - observed.value()),
        };
        CheckPoint {
            check: check.to_string(),
            citation: citation.to_string(),
            subject: subject.into(),
            parameter,
            observed,
            bound,
            tolerance,
            margin,
            pass: margin.value() >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub sample_size: usize,
    pub seed: u64,
    pub pass: bool,
    pub failures: usize,
    /// Smallest `bound - observed` over all points.
    pub worst_margin: ExtendedReal,
    pub points: Vec<CheckPoint>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, sample_size: usize, seed: u64, points: Vec<CheckPoint>) -> Self {
        let failures = points.iter().filter(|p| !p.pass).count();
        let worst_margin =
            points.iter().map(|p| p.margin).min().unwrap_or(ExtendedReal::INFINITY);
        VerificationReport {
            name: name.into(),
            sample_size,
            seed,
            pass: failures == 0,
            failures,
            worst_margin,
            points,
        }
    }

    /// Concatenates reports in the given order.
    pub fn merge(name: impl Into<String>, reports: Vec<VerificationReport>) -> Self {
        let (n, seed) = reports.first().map_or((0, 0), |r| (r.sample_size, r.seed));
        let points = reports.into_iter().flat_map(|r| r.points).collect();
        Self::new(name, n, seed, points)
    }
}

/// `n` draws of `d`, generated in shards of [`SHARD_SIZE`] on ChaCha20
/// streams `0, 1, ...` of `seed` and concatenated in shard order.
pub fn sharded_sample(d: &Distribution, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::argument("sample size must be >= 1"));
    }
    d.validate()?;
    let shards = n.div_ceil(SHARD_SIZE);
    let parts: Result<Vec<Vec<f64>>> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let len = SHARD_SIZE.min(n - i * SHARD_SIZE);
            d.sample_with(&mut rng, len)
        })
        .collect();
    Ok(parts?.concat())
}

/// `t` grid `t_max / points, 2 t_max / points, ..., t_max` where `t_max` is
/// the first doubling at which every bound of Bennett, Bernstein-1 and
/// Bernstein-2 is below `10 / n`.
pub fn tail_t_grid(sigma2: f64, n: usize, points: usize) -> Result<Vec<f64>> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() || n == 0 || points == 0 {
        return Err(Error::argument("tail_t_grid needs finite sigma2 >= 0, n >= 1, points >= 1"));
    }
    let floor = 10.0 / n as f64;
    let mut t_max = sigma2.sqrt().max(1e-3);
    while tail_bound(BoundKind::Bernstein2, sigma2, t_max)? >= floor {
        t_max *= 2.0;
    }
    Ok((1..=points).map(|i| t_max * i as f64 / points as f64).collect())
}

/// Compares empirical tail frequencies of `X - E X` against the three tail
/// bounds at each `t`. `proxies` lists `(side, sigma2)`; a two-sided entry
/// checks both tails. A point passes when
/// `freq <= bound + 3 sqrt(bound (1 - bound) / n) + 10 / n`.
pub fn mc_verify_tail_bounds(
    d: &Distribution,
    proxies: &[(Side, f64)],
    t_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if let Some((s, v)) = proxies.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::argument(format!("{} proxy {v} must be finite and >= 0", s.as_str())));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::argument("t grid must contain finite t >= 0"));
    }
    let mean = d.mean();
    let mut dev: Vec<f64> = sharded_sample(d, n, seed)?.into_iter().map(|x| x - mean).collect();
    dev.sort_by(f64::total_cmp);
    let nf = n as f64;
    let subject = d.to_string();
    let mut points = Vec::new();
    for &(side, sigma2) in proxies {
        let tails: &[Side] = match side {
            Side::Upper => &[Side::Upper],
            Side::Lower => &[Side::Lower],
            Side::TwoSided => &[Side::Upper, Side::Lower],
        };
        for &tail in tails {
            for &t in t_grid {
                let count = match tail {
                    Side::Lower => dev.partition_point(|x| *x <= -t),
                    _ => n - dev.partition_point(|x| *x < t),
                };
                let freq = count as f64 / nf;
                for kind in BoundKind::ALL {
                    let b = tail_bound(kind, sigma2, t)?;
                    let tol = 3.0 * (b * (1.0 - b) / nf).sqrt() + 10.0 / nf;
                    points.push(CheckPoint::new(
                        &format!("tail:{}:{}", tail.as_str(), kind.as_str()),
                        "prop:tail-bounds",
                        format!("{subject} sigma2={sigma2}"),
                        Some(t),
                        ExtendedReal::from_f64_unchecked(freq),
                        ExtendedReal::from_f64_unchecked(b),
                        tol,
                    ));
                }
            }
        }
    }
    Ok(VerificationReport::new(format!("tail_bounds:{subject}"), n, seed, points))
}

/// Names accepted by [`mc_verify_propositions`].
pub const SUITES: [&str; 8] = [
    "variance_floor",
    "closure",
    "abs_value",
    "dominance",
    "orlicz",
    "scaling",
    "tail_bounds",
    "all",
];

/// Runs one of the cross-module invariant suites (or `all`, in the order of
/// [`SUITES`]). Only `tail_bounds` draws samples; the others are exact.
pub fn mc_verify_propositions(suite: &str, n: usize, seed: u64) -> Result<VerificationReport> {
    let opts = SolverOptions::default();
    let points = match suite {
        "variance_floor" => suite_variance_floor(&opts)?,
        "closure" => suite_closure(&opts)?,
        "abs_value" => suite_abs_value(&opts)?,
        "dominance" => suite_dominance()?,
        "orlicz" => suite_orlicz()?,
        "scaling" => suite_scaling(&opts)?,
        "tail_bounds" => {
            return suite_tail_bounds(n, seed);
        }
        "all" => {
            let reports = SUITES[..SUITES.len() - 1]
                .iter()
                .map(|s| mc_verify_propositions(s, n, seed))
                .collect::<Result<Vec<_>>>()?;
            let mut r = VerificationReport::merge("all", reports);
            r.sample_size = n;
            r.seed = seed;
            return Ok(r);
        }
        other => {
            return Err(Error::argument(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(VerificationReport::new(suite, n, seed, points))
}

fn er(x: f64) -> ExtendedReal {
    ExtendedReal::from_f64_unchecked(x)
}

fn suite_variance_floor(opts: &SolverOptions) -> Result<Vec<CheckPoint>> {
    let mut pts = Vec::new();
    for d in catalog() {
        let var = d.moments().1;
        for side in [Side::Upper, Side::Lower] {
            let r = optimal_proxy(&d, side, opts)?;
            pts.push(CheckPoint::new(
                &format!("variance_floor:{}", side.as_str()),
                "prop:variance-floor",
                d.to_string(),
                None,
                er(var),
                r.value,
                1e-9,
            ));
            if matches!(d, Distribution::PointMass { .. }) {
                pts.push(CheckPoint::new(
                    &format!("degenerate:{}", side.as_str()),
                    "prop:degenerate",
                    d.to_string(),
                    None,
                    r.value,
                    ExtendedReal::ZERO,
                    0.0,
                ));
            }
        }
    }
    Ok(pts)
}

/// `certificate >= numeric optimal proxy` with the certificate as the bound.
fn closure_point(
    check: &str,
    citation: &str,
    subject: impl Into<String>,
    parameter: Option<f64>,
    numeric: ExtendedReal,
    cert: &ProxyCertificate,
) -> CheckPoint {
    CheckPoint::new(check, citation, subject, parameter, numeric, cert.bound, 1e-6)
}

fn suite_closure(opts: &SolverOptions) -> Result<Vec<CheckPoint>> {
    let mut pts = Vec::new();
    for (a, b) in [(1.0, 1.0), (0.5, 3.0), (2.0, 10.0)] {
        let certs = [
            ProxyCertificate::from_catalog(&Distribution::Poisson { a }, Side::TwoSided)?,
            ProxyCertificate::from_catalog(&Distribution::Poisson { a: b }, Side::TwoSided)?,
        ];
        let cert = cert_sum(&certs)?;
        let d = Distribution::IndependentSum(vec![
            Distribution::Poisson { a },
            Distribution::Poisson { a: b },
        ]);
        let r = optimal_proxy(&d, Side::TwoSided, opts)?;
        pts.push(closure_point("closure:sum", "prop:independent-sum", d.to_string(), None, r.value, &cert));
    }
    let skellam = ProxyCertificate::from_catalog(&Distribution::ScaledSkellam { a: 1.0 }, Side::TwoSided)?;
    let rademacher = ProxyCertificate::from_catalog(&Distribution::Rademacher, Side::TwoSided)?;
    for a in [0.25, 0.5, 0.75] {
        let cert = cert_convex(a, &skellam, &rademacher)?;
        let d = Distribution::IndependentSum(vec![
            Distribution::ScaledSkellam { a: 1.0 - a },
            Distribution::ScaledRademacher { a },
        ]);
        let r = optimal_proxy(&d, Side::TwoSided, opts)?;
        pts.push(closure_point("closure:convex", "prop:convexity", d.to_string(), Some(a), r.value, &cert));
    }
    for a in [0.5, 0.9, -0.7] {
        let cert = cert_scale(a, &skellam)?;
        let d = Distribution::ScaledSkellam { a: f64::abs(a) };
        let r = optimal_proxy(&d, Side::TwoSided, opts)?;
        pts.push(closure_point("closure:scale", "prop:balanced", d.to_string(), Some(a), r.value, &cert));
    }
    let mixtures: [&[(f64, f64)]; 3] =
        [&[(1.0, 0.5)], &[(0.3, 0.5), (0.7, -1.0)], &[(0.5, 0.0), (0.25, 0.9), (0.25, -0.2)]];
    for mix in mixtures {
        let cert = cert_bounded_multiplier(&rademacher)?;
        let m = ScaleMixture::new(Distribution::Rademacher, mix)?;
        let r = optimal_proxy(&m, Side::TwoSided, opts)?;
        pts.push(closure_point(
            "closure:bounded_multiplier",
            "prop:bounded-multiplier",
            format!("xi*rademacher, xi~{mix:?}"),
            None,
            r.value,
            &cert,
        ));
    }
    Ok(pts)
}

fn suite_abs_value(opts: &SolverOptions) -> Result<Vec<CheckPoint>> {
    let mut pts = Vec::new();
    for d in [
        Distribution::Skellam { a1: 1.0, a2: 1.0 },
        Distribution::Poisson { a: 1.0 },
        Distribution::Rademacher,
        Distribution::Binomial { n: 10, p: 0.3 },
    ] {
        let cert = cert_abs(&ProxyCertificate::from_catalog(&d, Side::TwoSided)?)?;
        let law = d
            .finite_law(1e-18)
            .ok_or_else(|| Error::Unsupported(format!("{d} has no finite law")))?
            .abs_centered()?;
        let r = optimal_proxy(&law, Side::Upper, opts)?;
        pts.push(closure_point("abs_value", "prop:absolute-value", format!("|{d} - E|"), None, r.value, &cert));
    }
    Ok(pts)
}

fn suite_dominance() -> Result<Vec<CheckPoint>> {
    let grid = lambda_grid(1e-3, 20.0, 20);
    let mut pts = Vec::new();
    for d in catalog() {
        let a = d.analytic_proxies().expect("catalog members have analytic proxies");
        for (side, s2) in [(Side::Upper, a.sp_upper), (Side::Lower, a.sp_lower)] {
            let Some(s2) = s2.as_finite() else { continue };
            let rep = mgf_dominance_check(&d, s2, side, &grid)?;
            let lw = rep.worst_lambda;
            let rhs = s2 * phi_unchecked(lw.abs());
            let lhs = d.clmgf(lw);
            let mut p = CheckPoint::new(
                &format!("dominance:{}", side.as_str()),
                "def:sub-poisson",
                d.to_string(),
                Some(lw),
                lhs,
                er(rhs),
                1e-12 * rhs,
            );
            p.pass = rep.pass;
            pts.push(p);
        }
    }
    Ok(pts)
}

fn suite_orlicz() -> Result<Vec<CheckPoint>> {
    let mut pts = Vec::new();
    for d in [
        Distribution::Poisson { a: 0.1 },
        Distribution::Poisson { a: 1.0 },
        Distribution::Poisson { a: 10.0 },
        Distribution::Skellam { a1: 1.0, a2: 1.0 },
        Distribution::Rademacher,
        Distribution::Gaussian { mu: 0.0, sigma2: 1.0 },
    ] {
        let s2 = d.analytic_proxies().expect("catalog member").sp_two_sided.value();
        let psi1 = psi_norm(&d, 1.0)?.value;
        let b = psi1_bound_from_proxy(s2)?;
        pts.push(CheckPoint::new("orlicz:psi1", "prop:psi1-from-proxy", d.to_string(), None, psi1, er(b), 1e-9 * b));
    }
    for d in catalog().into_iter().filter(Distribution::is_sub_gaussian) {
        let s2 = d.analytic_proxies().expect("catalog member").sp_two_sided;
        let psi2 = psi_norm(&d, 2.0)?.value;
        let bridge = match psi2.as_finite() {
            Some(v) => er(proxy_bound_from_psi2(v)?),
            None => ExtendedReal::INFINITY,
        };
        let tol = 1e-9 * bridge.as_finite().unwrap_or(0.0);
        pts.push(CheckPoint::new("orlicz:psi2_bridge", "prop:sp-le-sg", d.to_string(), None, s2, bridge, tol));
    }
    Ok(pts)
}

fn suite_scaling(opts: &SolverOptions) -> Result<Vec<CheckPoint>> {
    let base = ProxyCertificate::from_catalog(&Distribution::Rademacher, Side::TwoSided)?;
    let mut pts = Vec::new();
    for a in [1.0, 0.5, 0.25, -0.8] {
        let cert = cert_scale(a, &base)?;
        let d = Distribution::ScaledRademacher { a: f64::abs(a) };
        let r = optimal_proxy(&d, Side::TwoSided, opts)?;
        pts.push(closure_point("scaling", "prop:balanced", d.to_string(), Some(a), r.value, &cert));
    }
    // a = 1 leaves the certificate unchanged
    let id = cert_scale(1.0, &base)?;
    pts.push(CheckPoint::new("scaling:identity", "prop:balanced", "rademacher", Some(1.0), id.bound, base.bound, 0.0));
    pts.push(CheckPoint::new("scaling:identity", "prop:balanced", "rademacher", Some(1.0), base.bound, id.bound, 0.0));
    Ok(pts)
}

fn suite_tail_bounds(n: usize, seed: u64) -> Result<VerificationReport> {
    let reports = vec![
        mc_verify_tail_bounds(&Distribution::Poisson { a: 4.0 }, &[(Side::TwoSided, 4.0)], &[1.0, 2.0, 4.0, 8.0], n, seed)?,
        mc_verify_tail_bounds(&Distribution::PointMass { c: 5.0 }, &[(Side::TwoSided, 0.0)], &[0.5, 1.0], n, seed)?,
    ];
    Ok(VerificationReport::merge("tail_bounds", reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ss(v: Vec<f64>) -> SampleSet {
        SampleSet::new(v, 0, "test").unwrap()
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(SampleSet::new(vec![], 0, "x").is_err());
        assert!(SampleSet::new(vec![1.0, f64::NAN], 0, "x").is_err());
        assert!(SampleSet::new(vec![f64::INFINITY], 0, "x").is_err());
    }

    #[test]
    fn clmgf_at_zero_and_constant() {
        let s = ss(vec![0.1; 1000]);
        for l in [0.0, 1.0, -3.0, 1e6] {
            assert_eq!(empirical_clmgf(&s, l).unwrap(), 0.0);
        }
        let s = ss(vec![1.0, 2.0, 7.0]);
        assert_eq!(empirical_clmgf(&s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn clmgf_two_point() {
        let s = ss(vec![-1.0, 1.0]);
        let l: f64 = 0.7;
        assert!((empirical_clmgf(&s, l).unwrap() - l.cosh().ln()).abs() < 1e-15);
    }

    #[test]
    fn guard_reports_range() {
        let s = ss(vec![-2.0, 2.0]);
        match empirical_clmgf(&s, 400.0) {
            Err(Error::Range { low, high, .. }) => {
                assert_eq!(high, 350.0);
                assert_eq!(low, -350.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(empirical_clmgf(&s, 350.0).is_ok());
    }

    #[test]
    fn constant_proxy_is_zero() {
        let s = ss(vec![3.0; 50]);
        let r = empirical_proxy(&s, Side::TwoSided, None).unwrap();
        assert_eq!(r.result.value.value(), 0.0);
        assert!(r.estimate);
    }

    #[test]
    fn text_and_csv_loading() {
        let s = SampleSet::from_text("# header\n1.5\n\n-2\n3e1\n", "t").unwrap();
        assert_eq!(s.values(), &[1.5, -2.0, 30.0]);
        assert!(SampleSet::from_text("1\nx\n", "t").is_err());
        let csv = "a,b\n1,10\n2,20\n";
        assert_eq!(SampleSet::from_csv(csv, "b", "c").unwrap().values(), &[10.0, 20.0]);
        assert_eq!(SampleSet::from_csv(csv, "0", "c").unwrap().values(), &[1.0, 2.0]);
        assert!(SampleSet::from_csv(csv, "z", "c").is_err());
    }

    #[test]
    fn sharding_is_deterministic_and_extends() {
        let d = Distribution::Poisson { a: 2.0 };
        let a = sharded_sample(&d, SHARD_SIZE + 10, 9).unwrap();
        let b = sharded_sample(&d, SHARD_SIZE + 10, 9).unwrap();
        assert_eq!(a, b);
        let c = sharded_sample(&d, 100, 9).unwrap();
        assert_eq!(&a[..100], &c[..]);
        // shard 0 is the plain seeded stream
        assert_eq!(d.sample(100, 9).unwrap().values(), &c[..]);
    }

    #[test]
    fn tail_grid_reaches_floor() {
        let g = tail_t_grid(4.0, 1_000_000, 20).unwrap();
        let last = *g.last().unwrap();
        assert!(tail_bound(BoundKind::Bernstein2, 4.0, last).unwrap() < 1e-5);
        assert_eq!(g.len(), 20);
    }

    #[test]
    fn point_mass_tail_passes() {
        let r = mc_verify_tail_bounds(&Distribution::PointMass { c: 2.0 }, &[(Side::TwoSided, 0.0)], &[0.5, 1.0], 1000, 1)
            .unwrap();
        assert!(r.pass);
        assert!(r.points.iter().all(|p| p.observed.value() == 0.0));
    }

    #[test]
    fn unknown_suite_is_argument_error() {
        assert!(matches!(mc_verify_propositions("nope", 10, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn scaling_suite_passes() {
        let r = mc_verify_propositions("scaling", 0, 0).unwrap();
        assert!(r.pass, "{r:#?}");
    }
}
