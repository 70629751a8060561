//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::Command;
use std::time::{Duration, Instant};

use subpoisson::bounds::{bennett, bernstein1, bernstein2, chernoff_at, chernoff_lambda_star};
use subpoisson::closure::{cert_bounded_multiplier, cert_convex, cert_scale, cert_sum};
use subpoisson::empirical::{mc_verify_tail_bounds, tail_t_grid};
use subpoisson::orlicz::{proxy_bound_from_psi2, psi1_bound_from_proxy, psi_norm};
use subpoisson::proxy::{lambda_grid, optimal_proxy};
use subpoisson::special::{cosh_minus_one, h, h_inverse, lambert_w0, phi, phi_abs};
use subpoisson::{
    catalog, CenteredLogMgf, Distribution, ExtendedReal, ProxyCertificate, ScaleMixture, Side,
    SolverOptions,
};

type Outcome = (bool, String);

fn d(s: &str) -> Distribution {
    Distribution::parse(s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn side_value(d: &Distribution, side: Side) -> ExtendedReal {
    let a = d.analytic_proxies().unwrap();
    match side {
        Side::Upper => a.sp_upper,
        Side::Lower => a.sp_lower,
        Side::TwoSided => a.sp_two_sided,
    }
}

const SIDES: [Side; 3] = [Side::Upper, Side::Lower, Side::TwoSided];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let cases = [
        "bernoulli(0.01)", "bernoulli(0.3)", "bernoulli(0.5)", "bernoulli(0.9)",
        "binomial(10,0.3)", "rademacher", "scaledrademacher(0.5)", "scaledrademacher(2)",
        "poisson(0.1)", "poisson(1)", "poisson(10)", "skellam(3,1)",
        "scaledskellam(0.5)", "scaledskellam(1)", "gaussian(0,0.25)", "gaussian(0,1)",
        "gaussian(0,4)",
    ];
    for s in cases {
        let dist = d(s);
        for side in SIDES {
            let want = side_value(&dist, side).value();
            let got = optimal_proxy(&dist, side, &opts).unwrap().value.value();
            let r = rel(got, want);
            worst = worst.max(r);
            checked += 1;
            if !(r <= 1e-6) {
                failures.push(format!("{s} {}: {got} vs {want}", side.as_str()));
            }
        }
    }
    let e = d("exponential(1)");
    let lower = optimal_proxy(&e, Side::Lower, &opts).unwrap().value.value();
    worst = worst.max(rel(lower, 1.0));
    checked += 1;
    if !(rel(lower, 1.0) <= 1e-6) {
        failures.push(format!("exponential(1) lower: {lower} vs 1"));
    }
    for (dist, side) in [
        (e.clone(), Side::Upper),
        (e, Side::TwoSided),
        (d("scaledskellam(1.5)"), Side::Upper),
        (d("scaledskellam(1.5)"), Side::Lower),
        (d("scaledskellam(1.5)"), Side::TwoSided),
    ] {
        let v = optimal_proxy(&dist, side, &opts).unwrap().value;
        checked += 1;
        if !v.is_pos_infinite() {
            failures.push(format!("{dist} {} should be +inf, got {v}", side.as_str()));
        }
    }
    if start.elapsed() > Duration::from_secs(30) {
        failures.push(format!("runtime {:?} exceeds 30 s", start.elapsed()));
    }
    (failures.is_empty(), format!("{checked} values, worst rel {worst:.2e}{}", listed(&failures)))
}

fn criterion_2() -> Outcome {
    let mut worst_chain = f64::INFINITY;
    let mut worst_env: f64 = 0.0;
    let mut failures = Vec::new();
    for s2 in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let tmax = 50.0 * f64::sqrt(s2);
        for i in 0..200 {
            let t = tmax * i as f64 / 199.0;
            let b0 = bennett(s2, t).unwrap();
            let b1 = bernstein1(s2, t).unwrap();
            let b2 = bernstein2(s2, t).unwrap();
            let m = (b1 - b0).min(b2 - b1);
            worst_chain = worst_chain.min(m);
            if m < -1e-12 {
                failures.push(format!("chain s2={s2} t={t}: {b0} {b1} {b2}"));
            }
            let star = chernoff_lambda_star(s2, t).unwrap();
            let mut grid = lambda_grid(1e-6, 1e3, 100);
            grid.push(star);
            grid.push(0.0);
            let inf = grid.iter().map(|&l| chernoff_at(s2, t, l)).fold(f64::INFINITY, f64::min);
            let r = rel(inf, b0);
            worst_env = worst_env.max(r);
            if !(r <= 1e-8) {
                failures.push(format!("envelope s2={s2} t={t}: {inf} vs {b0}"));
            }
        }
    }
    (
        failures.is_empty(),
        format!("worst chain margin {worst_chain:.2e}, worst envelope rel {worst_env:.2e}{}", listed(&failures)),
    )
}

fn criterion_3() -> Outcome {
    let n = 1_000_000;
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut points = 0;
    for dist in catalog() {
        let a = dist.analytic_proxies().unwrap();
        let proxies: Vec<(Side, f64)> = [(Side::Upper, a.sp_upper), (Side::Lower, a.sp_lower)]
            .into_iter()
            .filter_map(|(s, v)| v.as_finite().map(|v| (s, v)))
            .collect();
        if proxies.is_empty() {
            continue;
        }
        let s2max = proxies.iter().map(|p| p.1).fold(0.0, f64::max);
        let grid = tail_t_grid(s2max, n, 40).unwrap();
        for seed in 1..=5 {
            let r = mc_verify_tail_bounds(&dist, &proxies, &grid, n, seed).unwrap();
            points += r.points.len();
            if !r.pass {
                failures.push(format!("{dist} seed {seed}: {} failures", r.failures));
            }
        }
    }
    let mut grid = tail_t_grid(1.0, n, 40).unwrap();
    grid.push(4.0);
    let control = mc_verify_tail_bounds(&d("poisson(4)"), &[(Side::Upper, 1.0)], &grid, n, 1).unwrap();
    let control_fails = control.failures;
    if control_fails == 0 {
        failures.push("negative control (poisson(4), sigma2 = 1) did not fail".into());
    }
    let at4 = control
        .points
        .iter()
        .filter(|p| p.parameter == Some(4.0))
        .all(|p| !p.pass);
    if !at4 {
        failures.push("negative control passes at t = 4".into());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("runtime {elapsed:?} exceeds 2 min"));
    }
    (
        failures.is_empty(),
        format!(
            "{points} points over 5 seeds, control failed at {control_fails} points, {:.1}s{}",
            elapsed.as_secs_f64(),
            listed(&failures)
        ),
    )
}

fn criterion_4() -> Outcome {
    let opts = SolverOptions::default();
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for dist in catalog() {
        let var = dist.variance();
        for side in SIDES {
            let v = optimal_proxy(&dist, side, &opts).unwrap().value;
            if let Some(x) = v.as_finite() {
                worst = worst.min(x - var);
            }
            if v.value() < var - 1e-9 {
                failures.push(format!("{dist} {}: {v} < {var}", side.as_str()));
            }
        }
    }
    for c in [-3.0, 0.0, 5.0, 1e6] {
        let p = Distribution::PointMass { c };
        for side in SIDES {
            let v = optimal_proxy(&p, side, &opts).unwrap().value.value();
            if v != 0.0 {
                failures.push(format!("{p} {}: {v} != 0", side.as_str()));
            }
        }
    }
    (failures.is_empty(), format!("worst proxy - variance {worst:.2e}{}", listed(&failures)))
}

fn criterion_5() -> Outcome {
    let opts = SolverOptions::default();
    let two = Side::TwoSided;
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    let mut check = |label: String, cert: &ProxyCertificate, numeric: ExtendedReal| {
        let m = cert.bound.value() - numeric.value();
        worst = worst.min(m);
        if !(m >= -1e-6) {
            failures.push(format!("{label}: cert {} < numeric {numeric}", cert.bound));
        }
    };
    for (a, b) in [(1.0, 1.0), (0.1, 10.0), (2.5, 4.0)] {
        let cert = cert_sum(&[
            ProxyCertificate::from_catalog(&Distribution::Poisson { a }, two).unwrap(),
            ProxyCertificate::from_catalog(&Distribution::Poisson { a: b }, two).unwrap(),
        ])
        .unwrap();
        let dist = d(&format!("sum(poisson({a}),poisson({b}))"));
        check(dist.to_string(), &cert, optimal_proxy(&dist, two, &opts).unwrap().value);
    }
    let skellam = ProxyCertificate::from_catalog(&d("scaledskellam(1)"), two).unwrap();
    let rad = ProxyCertificate::from_catalog(&d("rademacher"), two).unwrap();
    for a in [0.0, 0.2, 0.5, 0.8, 1.0] {
        let cert = cert_convex(a, &skellam, &rad).unwrap();
        let dist = Distribution::IndependentSum(vec![
            Distribution::ScaledSkellam { a: 1.0 - a },
            Distribution::ScaledRademacher { a },
        ]);
        check(dist.to_string(), &cert, optimal_proxy(&dist, two, &opts).unwrap().value);
    }
    for a in [0.1, 0.5, 0.75, 1.0, -0.6] {
        let cert = cert_scale(a, &skellam).unwrap();
        let dist = Distribution::ScaledSkellam { a: f64::abs(a) };
        check(format!("scale {a}"), &cert, optimal_proxy(&dist, two, &opts).unwrap().value);
    }
    let mixtures: [&[(f64, f64)]; 4] = [
        &[(1.0, 1.0)],
        &[(0.5, 0.3), (0.5, -0.9)],
        &[(0.2, 0.0), (0.3, 0.5), (0.5, 1.0)],
        &[(0.25, -1.0), (0.75, 0.1)],
    ];
    for mix in mixtures {
        let cert = cert_bounded_multiplier(&rad).unwrap();
        let m = ScaleMixture::new(Distribution::Rademacher, mix).unwrap();
        check(format!("multiplier {mix:?}"), &cert, optimal_proxy(&m, two, &opts).unwrap().value);
    }
    (failures.is_empty(), format!("worst cert - numeric {worst:.2e}{}", listed(&failures)))
}

/// `sum_{k >= 2} x^k / k!`, accumulated from the smallest term up.
fn phi_series(x: f64) -> f64 {
    let mut terms = Vec::new();
    let mut t = x * x / 2.0;
    let mut k = 2.0;
    while t != 0.0 && t.abs() > 1e-30 * (x * x) {
        terms.push(t);
        k += 1.0;
        t *= x / k;
    }
    terms.iter().rev().sum()
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let grid = lambda_grid(1e-12, 50.0, 50);
    for &x0 in &grid {
        for x in [x0, -x0] {
            let c = cosh_minus_one(x).unwrap();
            let p = phi_abs(x).unwrap();
            if !(c <= p && p <= 2.0 * c) {
                failures.push(format!("cosh sandwich at {x}: {c} {p} {}", 2.0 * c));
            }
            if !(phi(x).unwrap() <= p) {
                failures.push(format!("phi(x) <= phi(|x|) at {x}"));
            }
        }
    }
    let wgrid: Vec<f64> = std::iter::once(0.0).chain(lambda_grid(1e-12, 1e12, 20)).collect();
    for &x in &wgrid {
        let w = lambert_w0(x).unwrap();
        for c in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let wc = lambert_w0(c * x).unwrap();
            if !(c * w <= wc && wc <= w) {
                failures.push(format!("W inequality c={c} x={x}: {} {wc} {w}", c * w));
            }
        }
        if x > 0.0 && !(rel(w * w.exp(), x) <= 1e-10) {
            failures.push(format!("W round trip at {x}"));
        }
    }
    let mut worst_h: f64 = 0.0;
    for &y in &lambda_grid(1e-12, 1e6, 20) {
        let r = rel(h(h_inverse(y).unwrap()).unwrap(), y);
        worst_h = worst_h.max(r);
        if !(r <= 1e-10) {
            failures.push(format!("h round trip at {y}"));
        }
    }
    let mut worst_phi: f64 = 0.0;
    for &m in &lambda_grid(1e-300, 1.0, 10) {
        for x in [m, -m] {
            let r = rel(phi(x).unwrap(), phi_series(x));
            worst_phi = worst_phi.max(r);
            if !(r <= 5e-13) {
                failures.push(format!("phi vs series at {x}: rel {r:e}"));
            }
        }
    }
    (
        failures.is_empty(),
        format!("h round trip rel {worst_h:.1e}, phi vs series rel {worst_phi:.1e}{}", listed(&failures)),
    )
}

fn criterion_7() -> Outcome {
    let opts = SolverOptions::default();
    let mut failures = Vec::new();
    let mut worst: f64 = f64::INFINITY;
    for s in ["poisson(0.1)", "poisson(1)", "poisson(10)", "skellam(1,1)", "rademacher", "gaussian(0,1)"] {
        let dist = d(s);
        let s2 = optimal_proxy(&dist, Side::TwoSided, &opts).unwrap().value.value();
        let psi1 = psi_norm(&dist, 1.0).unwrap().value.value();
        let b = psi1_bound_from_proxy(s2).unwrap();
        worst = worst.min(b - psi1);
        if !(psi1 <= b) {
            failures.push(format!("psi1 bound {s}: psi1 {psi1} > {b}"));
        }
    }
    for dist in catalog().into_iter().filter(Distribution::is_sub_gaussian) {
        let s2 = optimal_proxy(&dist, Side::TwoSided, &opts).unwrap().value.value();
        let psi2 = psi_norm(&dist, 2.0).unwrap().value.value();
        let bridge = proxy_bound_from_psi2(psi2).unwrap();
        worst = worst.min(bridge - s2);
        if !(s2 <= bridge + 1e-6) {
            failures.push(format!("bridge {dist}: {s2} > {bridge}"));
        }
    }
    let psi2 = psi_norm(&d("rademacher"), 2.0).unwrap().value.value();
    let bridge = proxy_bound_from_psi2(psi2).unwrap();
    let r = rel(bridge, 1.0);
    if !(r <= 1e-8) {
        failures.push(format!("rademacher bridge {bridge} != 1"));
    }
    (
        failures.is_empty(),
        format!("worst margin {worst:.2e}, rademacher bridge rel {r:.1e}{}", listed(&failures)),
    )
}

fn criterion_8() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_subpoisson");
    let cases: &[&[&str]] = &[
        &["proxy", "poisson(4)"],
        &["--format", "json", "proxy", "sum(poisson(1),bernoulli(0.2))"],
        &["bound", "--sigma2", "4", "--t", "0:10:0.5", "--kind", "all"],
        &["--format", "json", "cert", "sum", "poisson(1)", "poisson(1)"],
        &["--format", "json", "orlicz", "poisson(1)"],
        &["--format", "json", "verify", "--suite", "tail_bounds", "--n", "200000", "--seed", "7"],
        &["verify", "--suite", "all", "--n", "100000", "--seed", "3"],
        &["--format", "csv", "catalog"],
    ];
    let mut failures = Vec::new();
    for args in cases {
        let a = Command::new(exe).args(*args).output().unwrap();
        let b = Command::new(exe).args(*args).output().unwrap();
        if a.stdout != b.stdout || a.status != b.status || a.stdout.is_empty() {
            failures.push(args.join(" "));
        }
    }
    (failures.is_empty(), format!("{} invocations run twice{}", cases.len(), listed(&failures)))
}

fn listed(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; {}", failures.join("; "))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("catalog oracle equivalence", criterion_1),
        ("bound chain and Chernoff envelope", criterion_2),
        ("Monte-Carlo validity and negative control", criterion_3),
        ("variance floor and degeneracy", criterion_4),
        ("closure soundness", criterion_5),
        ("special functions", criterion_6),
        ("Orlicz bridges", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f();
        all &= ok;
        println!(
            "criterion {} {} {name}: {detail} [{:.2}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
