//! The `subpoisson` command line.
//!
//! ```text
//! subpoisson [--format json|csv|table] <command>
//!   proxy <descriptor> [--side S] [--tol X] [--grid-per-decade N]
//!         [--lambda-max X] [--divergence-cap X] [--samples FILE [--column C]]
//!   bound --sigma2 X --t a:b:step [--kind all|bennett|bernstein1|bernstein2] [--side S]
//!   cert sum|convex|scale|abs|multiplier|bounded|subgaussian ...
//!   orlicz <descriptor>
//!   verify [--suite NAME] [--n N] [--seed N]
//!   catalog
//! ```
//!
//! JSON output carries `"schema": "subpoisson/v1"`, has sorted keys and
//! writes floats in shortest round-trip form; infinities are the strings
//! `"inf"` and `"-inf"`. Tables round to 6 significant digits. Exit status is
//! 0 on success, 1 when a verification fails and 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{parse_t_range, BoundCurve, BoundKind};
use crate::closure::{
    cert_abs, cert_bounded_multiplier, cert_convex, cert_from_bounded, cert_from_subgaussian,
    cert_scale, cert_sum, BoundedShape, ProxyCertificate,
};
use crate::distributions::{catalog, Distribution};
use crate::empirical::{empirical_proxy, mc_verify_propositions, SampleSet, SUITES};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::orlicz::{proxy_bound_from_psi2, psi1_bound_from_proxy, psi_norm, OrliczNorm};
use crate::proxy::{optimal_proxy, Side, SolverOptions};

pub const SCHEMA: &str = "subpoisson/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "subpoisson", version, about = "Sub-Poisson variance proxies and tail bounds")]
struct Cli {
    /// Output format (default: csv for `bound`, table otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal variance proxies: analytic value, numeric value and their difference.
    Proxy(ProxyArgs),
    /// Bennett and Bernstein tail bounds over a grid of t.
    Bound(BoundArgs),
    /// Proxy certificates from the closure rules.
    Cert {
        #[command(subcommand)]
        rule: CertCommand,
    },
    /// psi1 and psi2 norms with the proxy bridges.
    Orlicz { descriptor: String },
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// List the reference members and their exact proxies.
    Catalog,
}

#[derive(Debug, Args)]
struct ProxyArgs {
    descriptor: String,
    /// upper, lower, two_sided or all.
    #[arg(long, default_value = "all")]
    side: String,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid_per_decade: Option<usize>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    divergence_cap: Option<f64>,
    /// Sample file for an additional empirical estimate.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// CSV column (header name or index) in the sample file.
    #[arg(long, requires = "samples")]
    column: Option<String>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    sigma2: f64,
    /// `start:stop:step` or a single value.
    #[arg(long = "t")]
    t: String,
    /// all, bennett, bernstein1 or bernstein2.
    #[arg(long, default_value = "all")]
    kind: String,
    #[arg(long, default_value = "upper")]
    side: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum CertCommand {
    /// Independent sum.
    Sum {
        #[arg(required = true, num_args = 1..)]
        descriptors: Vec<String>,
        #[arg(long, default_value = "two_sided")]
        side: String,
    },
    /// `(1 - a) X + a Y`.
    Convex {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        x: String,
        y: String,
    },
    /// `a X`.
    Scale {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        descriptor: String,
        #[arg(long, default_value = "two_sided")]
        side: String,
    },
    /// `|X - E X|`.
    Abs { descriptor: String },
    /// `xi X` with `|xi| <= 1` independent of centered `X`.
    Multiplier { descriptor: String },
    /// Bounded variables.
    Bounded {
        /// `a,b` for `X` in `[a, b]`.
        #[arg(long, allow_hyphen_values = true, group = "shape")]
        range: Option<String>,
        /// Mean of `X` in `[0, 1]`.
        #[arg(long, group = "shape")]
        unit_interval: Option<f64>,
        /// `E X^2` for `X <= 1`.
        #[arg(long, group = "shape")]
        le_one: Option<f64>,
        /// `E X^2` for `|X| <= 1`.
        #[arg(long, group = "shape")]
        abs_le_one: Option<f64>,
    },
    /// From a sub-Gaussian proxy.
    Subgaussian {
        #[arg(long)]
        sg: f64,
        #[arg(long, default_value = "two_sided")]
        side: String,
    },
}

/// A rendered result: JSON for `--format json`, rows for csv and tables.
struct Output {
    json: Value,
    table: Table,
    /// Exit status when the command itself succeeded.
    status: i32,
}

enum Cell {
    Text(String),
    Num(ExtendedReal),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        match ExtendedReal::new(x) {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text("nan".into()),
        }
    }
}

impl From<ExtendedReal> for Cell {
    fn from(x: ExtendedReal) -> Self {
        Cell::Num(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(headers: Vec<&'static str>) -> Self {
        Table { headers, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(s) => csv_escape(s),
                    Cell::Num(x) => x.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn human(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Text(s) => s.clone(),
                        Cell::Num(x) => sig6(x.value()),
                        Cell::Empty => "-".into(),
                    })
                    .collect()
            })
            .collect();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |items: Vec<&str>| -> String {
            let parts: Vec<String> =
                items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let rules: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let mut out = line(self.headers.clone());
        out.push_str(&line(rules.iter().map(String::as_str).collect()));
        for row in &cells {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `x` rounded to 6 significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.5e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let f = format!("{x:.decimals$}");
        if f.contains('.') {
            f.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            f
        }
    } else {
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

/// Canonical JSON text: sorted keys, two-space indent, trailing newline.
pub fn to_canonical_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn envelope(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

fn sides(spec: &str) -> Result<Vec<Side>> {
    if spec.eq_ignore_ascii_case("all") {
        Ok(vec![Side::Upper, Side::Lower, Side::TwoSided])
    } else {
        Ok(vec![spec.parse()?])
    }
}

fn kinds(spec: &str) -> Result<Vec<BoundKind>> {
    if spec.eq_ignore_ascii_case("all") {
        Ok(BoundKind::ALL.to_vec())
    } else {
        Ok(vec![spec.parse()?])
    }
}

fn side_value(a: &crate::distributions::AnalyticProxies, side: Side) -> ExtendedReal {
    match side {
        Side::Upper => a.sp_upper,
        Side::Lower => a.sp_lower,
        Side::TwoSided => a.sp_two_sided,
    }
}

fn cmd_proxy(args: &ProxyArgs) -> Result<Output> {
    let d = Distribution::parse(&args.descriptor)?;
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        tol: args.tol.unwrap_or(defaults.tol),
        grid_per_decade: args.grid_per_decade.unwrap_or(defaults.grid_per_decade),
        lambda_max: args.lambda_max.unwrap_or(defaults.lambda_max),
        divergence_cap: args.divergence_cap.unwrap_or(defaults.divergence_cap),
        ..defaults
    };
    opts.validate()?;
    let samples = match &args.samples {
        Some(p) => Some(SampleSet::load(p, args.column.as_deref())?),
        None => None,
    };
    let analytic = d.analytic_proxies();
    let mut table = Table::new(vec!["side", "analytic", "numeric", "delta", "argmax_lambda", "divergent"]);
    let mut results = Vec::new();
    let mut empirical = Vec::new();
    for side in sides(&args.side)? {
        let num = optimal_proxy(&d, side, &opts)?;
        let an = analytic.as_ref().map(|a| side_value(a, side));
        let delta = an.map(|a| agreement(a, num.value));
        table.push(vec![
            side.as_str().into(),
            an.into(),
            num.value.into(),
            delta.into(),
            num.argmax_lambda.into(),
            num.diagnostics.divergent.to_string().into(),
        ]);
        results.push(json!({
            "side": side,
            "analytic": an,
            "numeric": to_value(&num),
            "delta": delta,
        }));
        if let Some(s) = &samples {
            empirical.push(to_value(&empirical_proxy(s, side, None)?));
        }
    }
    if samples.is_some() {
        table.headers.push("empirical_estimate");
        for (row, e) in table.rows.iter_mut().zip(&empirical) {
            let v: ExtendedReal = serde_json::from_value(e["result"]["value"].clone())
                .expect("proxy value round-trips");
            row.push(v.into());
        }
    }
    let mut body = json!({
        "distribution": d.to_string(),
        "source": analytic.map(|a| a.source),
        "results": results,
    });
    if samples.is_some() {
        body["empirical"] = json!({
            "note": "heuristic estimate from samples; no optimality guarantee",
            "results": empirical,
        });
    }
    Ok(Output { json: envelope("proxy", body), table, status: 0 })
}

/// `|analytic - numeric|`, zero when both are `+inf`.
fn agreement(a: ExtendedReal, n: ExtendedReal) -> ExtendedReal {
    match (a.as_finite(), n.as_finite()) {
        (Some(x), Some(y)) => ExtendedReal::from_f64_unchecked((x - y).abs()),
        _ if a == n => ExtendedReal::ZERO,
        _ => ExtendedReal::INFINITY,
    }
}

fn cmd_bound(args: &BoundArgs) -> Result<Output> {
    let ts = parse_t_range(&args.t)?;
    let side: Side = args.side.parse()?;
    let ks = kinds(&args.kind)?;
    let curves = ks
        .iter()
        .map(|&k| BoundCurve::new(k, side, args.sigma2, &ts))
        .collect::<Result<Vec<_>>>()?;
    let mut headers = vec!["t"];
    headers.extend(ks.iter().map(|k| k.as_str()));
    let mut table = Table::new(headers);
    for (i, &t) in ts.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(curves.iter().map(|c| Cell::from(c.points[i].1)));
        table.push(row);
    }
    let body = json!({ "sigma2": args.sigma2, "side": side, "curves": to_value(&curves) });
    Ok(Output { json: envelope("bound", body), table, status: 0 })
}

/// Certificate for a descriptor: catalog members directly, sums member-wise.
fn cert_for(d: &Distribution, side: Side) -> Result<ProxyCertificate> {
    match d {
        Distribution::IndependentSum(m) => {
            let certs = m.iter().map(|x| cert_for(x, side)).collect::<Result<Vec<_>>>()?;
            cert_sum(&certs)
        }
        _ => ProxyCertificate::from_catalog(d, side),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::argument(format!("expected a,b but got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn cmd_cert(rule: &CertCommand) -> Result<Output> {
    let parse = |s: &str| Distribution::parse(s);
    let two = Side::TwoSided;
    let cert = match rule {
        CertCommand::Sum { descriptors, side } => {
            let side: Side = side.parse()?;
            let certs = descriptors
                .iter()
                .map(|s| cert_for(&parse(s)?, side))
                .collect::<Result<Vec<_>>>()?;
            cert_sum(&certs)?
        }
        CertCommand::Convex { a, x, y } => {
            cert_convex(*a, &cert_for(&parse(x)?, two)?, &cert_for(&parse(y)?, two)?)?
        }
        CertCommand::Scale { a, descriptor, side } => {
            cert_scale(*a, &cert_for(&parse(descriptor)?, side.parse()?)?)?
        }
        CertCommand::Abs { descriptor } => cert_abs(&cert_for(&parse(descriptor)?, two)?)?,
        CertCommand::Multiplier { descriptor } => {
            cert_bounded_multiplier(&cert_for(&parse(descriptor)?, two)?)?
        }
        CertCommand::Bounded { range, unit_interval, le_one, abs_le_one } => {
            let shape = if let Some(r) = range {
                let (a, b) = parse_pair(r)?;
                BoundedShape::Range { a, b }
            } else if let Some(m) = unit_interval {
                BoundedShape::UnitInterval { mean: *m }
            } else if let Some(m) = le_one {
                BoundedShape::LeOne { second_moment: *m }
            } else if let Some(m) = abs_le_one {
                BoundedShape::AbsLeOne { second_moment: *m }
            } else {
                return Err(Error::argument(
                    "bounded needs one of --range, --unit-interval, --le-one, --abs-le-one",
                ));
            };
            cert_from_bounded(shape)?
        }
        CertCommand::Subgaussian { sg, side } => cert_from_subgaussian(*sg, side.parse()?)?,
    };
    let mut table = Table::new(vec!["step", "rule", "citation", "inputs", "result", "note"]);
    for (i, s) in cert.derivation.iter().enumerate() {
        let inputs: Vec<String> = s.inputs.iter().map(|x| sig6(x.value())).collect();
        table.push(vec![
            (i + 1).to_string().into(),
            to_value(&s.rule).as_str().unwrap_or_default().to_string().into(),
            s.citation.as_str().into(),
            inputs.join(" ").into(),
            s.result.into(),
            s.note.as_str().into(),
        ]);
    }
    table.push(vec![
        "bound".into(),
        cert.side.as_str().into(),
        Cell::Empty,
        Cell::Empty,
        cert.bound.into(),
        Cell::Empty,
    ]);
    let body = json!({ "certificate": to_value(&cert) });
    Ok(Output { json: envelope("cert", body), table, status: 0 })
}

fn cmd_orlicz(descriptor: &str) -> Result<Output> {
    let d = Distribution::parse(descriptor)?;
    let psi1: OrliczNorm = psi_norm(&d, 1.0)?;
    let psi2: OrliczNorm = psi_norm(&d, 2.0)?;
    let proxy = match d.analytic_proxies() {
        Some(a) => a.sp_two_sided,
        None => optimal_proxy(&d, Side::TwoSided, &SolverOptions::default())?.value,
    };
    let psi1_bound = match proxy.as_finite() {
        Some(s) if s > 0.0 => Some(ExtendedReal::from_f64_unchecked(psi1_bound_from_proxy(s)?)),
        Some(_) => Some(ExtendedReal::ZERO),
        None => None,
    };
    let bridge = match psi2.value.as_finite() {
        Some(v) => ExtendedReal::from_f64_unchecked(proxy_bound_from_psi2(v)?),
        None => ExtendedReal::INFINITY,
    };
    let mut table = Table::new(vec!["quantity", "value"]);
    table.push(vec!["psi1".into(), psi1.value.into()]);
    table.push(vec!["psi2".into(), psi2.value.into()]);
    table.push(vec!["sigma2_sp".into(), proxy.into()]);
    table.push(vec!["psi1_bound_from_proxy".into(), psi1_bound.into()]);
    table.push(vec!["proxy_bound_from_psi2".into(), bridge.into()]);
    let body = json!({
        "distribution": d.to_string(),
        "psi1": to_value(&psi1),
        "psi2": to_value(&psi2),
        "sigma2_sp": proxy,
        "psi1_bound_from_proxy": psi1_bound,
        "proxy_bound_from_psi2": bridge,
    });
    Ok(Output { json: envelope("orlicz", body), table, status: 0 })
}

fn cmd_verify(args: &VerifyArgs) -> Result<Output> {
    if !SUITES.contains(&args.suite.as_str()) {
        return Err(Error::argument(format!(
            "unknown suite {:?}; expected one of {}",
            args.suite,
            SUITES.join(", ")
        )));
    }
    let report = mc_verify_propositions(&args.suite, args.n, args.seed)?;
    let mut table = Table::new(vec![
        "check", "subject", "parameter", "observed", "bound", "tolerance", "margin", "pass",
    ]);
    for p in &report.points {
        table.push(vec![
            p.check.as_str().into(),
            p.subject.as_str().into(),
            p.parameter.into(),
            p.observed.into(),
            p.bound.into(),
            p.tolerance.into(),
            p.margin.into(),
            (if p.pass { "pass" } else { "FAIL" }).into(),
        ]);
    }
    let status = if report.pass { 0 } else { 1 };
    Ok(Output { json: envelope("verify", json!({ "report": to_value(&report) })), table, status })
}

fn cmd_catalog() -> Result<Output> {
    let mut table = Table::new(vec![
        "descriptor", "mean", "variance", "sp_upper", "sp_lower", "sp_two_sided", "source",
    ]);
    let mut members = Vec::new();
    for d in catalog() {
        let (mean, var) = d.moments();
        let a = d.analytic_proxies().expect("catalog members have analytic proxies");
        table.push(vec![
            d.to_string().into(),
            mean.into(),
            var.into(),
            a.sp_upper.into(),
            a.sp_lower.into(),
            a.sp_two_sided.into(),
            a.source.into(),
        ]);
        members.push(json!({
            "descriptor": d.to_string(),
            "mean": mean,
            "variance": var,
            "proxies": to_value(&a),
        }));
    }
    Ok(Output { json: envelope("catalog", json!({ "members": members })), table, status: 0 })
}

/// Runs the CLI on `argv` (including the program name), writing results to
/// `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let default_format = match cli.command {
        Command::Bound(_) => Format::Csv,
        _ => Format::Table,
    };
    let result = match &cli.command {
        Command::Proxy(a) => cmd_proxy(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Cert { rule } => cmd_cert(rule),
        Command::Orlicz { descriptor } => cmd_orlicz(descriptor),
        Command::Verify(a) => cmd_verify(a),
        Command::Catalog => cmd_catalog(),
    };
    match result {
        Ok(o) => {
            let text = match cli.format.unwrap_or(default_format) {
                Format::Json => to_canonical_json(&o.json),
                Format::Csv => o.table.csv(),
                Format::Table => o.table.human(),
            };
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            o.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Entry point for the binary.
pub fn main_exit() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
