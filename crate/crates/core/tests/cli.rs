use std::process::Command;

use serde_json::Value;
use subpoisson::cli::{run, to_canonical_json, SCHEMA};

fn run_str(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("subpoisson").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let (code, out, err) = run_str(&a);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(to_canonical_json(&v), out, "JSON is not canonical");
    assert_eq!(v["schema"], SCHEMA);
    v
}

#[test]
fn proxy_bernoulli() {
    let v = json(&["proxy", "bernoulli(0.3)"]);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["analytic"], 0.21);
        let n = r["numeric"]["value"].as_f64().unwrap();
        assert!((n - 0.21).abs() < 1e-9);
    }
}

#[test]
fn proxy_point_mass_is_zero() {
    let v = json(&["proxy", "pointmass(5)"]);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["numeric"]["value"], 0.0);
    }
}

#[test]
fn proxy_infinite_is_string() {
    let v = json(&["proxy", "exponential(1)", "--side", "upper"]);
    assert_eq!(v["results"][0]["numeric"]["value"], "inf");
    assert_eq!(v["results"][0]["delta"], 0.0);
}

#[test]
fn proxy_with_sample_file() {
    let dir = std::env::temp_dir().join(format!("subpoisson-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("samples.csv");
    std::fs::write(&path, "x,y\n-1,0\n1,0\n-1,0\n1,0\n").unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["proxy", "rademacher", "--side", "upper", "--samples", p, "--column", "x"]);
    let e = &v["empirical"]["results"][0];
    assert_eq!(e["estimate"], true);
    assert!((e["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bound_csv_and_t_zero() {
    let (code, out, _) = run_str(&["bound", "--sigma2", "4", "--t", "0:10:0.5", "--kind", "all"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,bennett,bernstein1,bernstein2");
    assert_eq!(lines.len(), 22);
    assert_eq!(lines[1], "0,1,1,1");
    let (_, out, _) = run_str(&["bound", "--sigma2", "1", "--t", "0", "--kind", "bennett"]);
    assert_eq!(out, "t,bennett\n0,1\n");
}

#[test]
fn cert_sum_prints_derivation() {
    let v = json(&["cert", "sum", "poisson(1)", "poisson(1)"]);
    let c = &v["certificate"];
    assert_eq!(c["bound"], 2.0);
    assert_eq!(c["derivation"].as_array().unwrap().len(), 3);
    let (code, out, _) = run_str(&["cert", "sum", "poisson(1)", "poisson(1)"]);
    assert_eq!(code, 0);
    assert!(out.contains("independent_sum"));
}

#[test]
fn cert_variants() {
    assert_eq!(json(&["cert", "scale", "--a", "-0.5", "skellam(1,1)"])["certificate"]["bound"], 0.5);
    assert_eq!(json(&["cert", "scale", "--a", "2", "rademacher"])["certificate"]["bound"], "inf");
    assert_eq!(json(&["cert", "convex", "--a", "0.5", "scaledskellam(1)", "rademacher"])["certificate"]["bound"], 1.5);
    assert_eq!(json(&["cert", "abs", "skellam(1,1)"])["certificate"]["bound"], 4.0);
    assert_eq!(json(&["cert", "multiplier", "rademacher"])["certificate"]["bound"], 1.0);
    assert_eq!(json(&["cert", "bounded", "--range", "-1,1"])["certificate"]["bound"], 1.0);
    assert_eq!(json(&["cert", "bounded", "--unit-interval", "0.3"])["certificate"]["bound"], 0.3);
    assert_eq!(json(&["cert", "subgaussian", "--sg", "2"])["certificate"]["bound"], 2.0);
    assert_eq!(run_str(&["cert", "bounded"]).0, 2);
}

#[test]
fn orlicz_output() {
    let v = json(&["orlicz", "poisson(1)"]);
    assert_eq!(v["psi2"]["value"], "inf");
    let psi1 = v["psi1"]["value"].as_f64().unwrap();
    let b = v["psi1_bound_from_proxy"].as_f64().unwrap();
    assert!(psi1 <= b);
}

#[test]
fn catalog_lists_members() {
    let v = json(&["catalog"]);
    let m = v["members"].as_array().unwrap();
    assert!(m.iter().any(|x| x["descriptor"] == "poisson(10)" && x["proxies"]["sp_two_sided"] == 10.0));
    assert!(m.iter().any(|x| x["descriptor"] == "exponential(1)" && x["proxies"]["sp_upper"] == "inf"));
}

#[test]
fn verify_exit_codes() {
    let (code, out, _) = run_str(&["verify", "--suite", "scaling", "--n", "1000", "--seed", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("pass"));
    assert_eq!(run_str(&["verify", "--suite", "bogus"]).0, 2);
}

#[test]
fn usage_errors() {
    for args in [
        &["proxy", "gamma(2)"][..],
        &["proxy", "poisson(-1)"],
        &["bound", "--sigma2", "-1", "--t", "1"],
        &["bound", "--sigma2", "1", "--t", "5:1:1"],
        &["bogus"],
        &["--format", "xml", "catalog"],
        &["proxy", "poisson(1)", "--samples", "/definitely/not/here"],
    ] {
        let (code, _, err) = run_str(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.is_empty());
    }
    let (_, _, err) = run_str(&["proxy", "sum(poisson(1), gamma(2))"]);
    assert!(err.contains("position 16"), "{err}");
}

#[test]
fn binary_is_deterministic() {
    let exe = env!("CARGO_BIN_EXE_subpoisson");
    for args in [
        &["--format", "json", "verify", "--suite", "tail_bounds", "--n", "100000", "--seed", "7"][..],
        &["proxy", "skellam(3,1)"],
    ] {
        let a = Command::new(exe).args(args).output().unwrap();
        let b = Command::new(exe).args(args).output().unwrap();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}
