use std::ffi::{CStr, CString};
use std::ptr;

use subpoisson_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sp_last_error()) }.to_str().unwrap().to_owned()
}

fn parse(s: &str) -> *mut SpDistribution {
    let c = CString::new(s).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { sp_distribution_parse(c.as_ptr(), &mut d) }, SpStatus::Ok);
    d
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    assert_eq!(sp_phi(0.0, &mut v), SpStatus::Ok);
    assert_eq!(v, 0.0);
    assert_eq!(sp_lambert_w0(1.0, &mut v), SpStatus::Ok);
    assert!((v - 0.567_143_290_409_783_8).abs() < 1e-15);
    assert_eq!(sp_h_inverse(0.0, &mut v), SpStatus::Ok);
    assert_eq!(v, 0.0);
    assert_eq!(sp_phi(f64::NAN, &mut v), SpStatus::Domain);
    assert!(last_error().contains("phi"));
    assert_eq!(sp_phi(1.0, ptr::null_mut()), SpStatus::NullPointer);
}

#[test]
fn bound_codes() {
    let mut v = 0.0;
    for k in [SP_BOUND_BENNETT, SP_BOUND_BERNSTEIN1, SP_BOUND_BERNSTEIN2] {
        assert_eq!(sp_bound(k, 2.0, 0.0, &mut v), SpStatus::Ok);
        assert_eq!(v, 1.0);
    }
    assert_eq!(sp_bound(7, 2.0, 1.0, &mut v), SpStatus::Argument);
    assert_eq!(sp_bound(SP_BOUND_BENNETT, -1.0, 1.0, &mut v), SpStatus::Domain);
}

#[test]
fn distribution_handle_round_trip() {
    let d = parse("skellam(3,1)");
    let (mut m, mut var) = (0.0, 0.0);
    unsafe {
        assert_eq!(sp_distribution_moments(d, &mut m, &mut var), SpStatus::Ok);
        assert_eq!((m, var), (2.0, 4.0));
        let mut up = 0.0;
        let mut lo = 0.0;
        assert_eq!(sp_optimal_proxy(d, SP_SIDE_UPPER, &mut up), SpStatus::Ok);
        assert_eq!(sp_optimal_proxy(d, SP_SIDE_LOWER, &mut lo), SpStatus::Ok);
        // both sides peak at lambda -> 0, where the ratio tends to the variance
        assert!((up - 4.0).abs() < 1e-9 && (lo - 4.0).abs() < 1e-9, "{up} {lo}");
        assert_eq!(sp_optimal_proxy(d, 5, &mut up), SpStatus::Argument);
        let mut psi = 0.0;
        assert_eq!(sp_psi_norm(d, 1.0, &mut psi), SpStatus::Ok);
        assert!(psi.is_finite() && psi > 0.0);
        assert_eq!(sp_psi_norm(d, 2.0, &mut psi), SpStatus::Ok);
        assert_eq!(psi, f64::INFINITY);
        sp_distribution_free(d);
        sp_distribution_free(ptr::null_mut());
    }
}

#[test]
fn infinite_proxy_is_reported_as_inf() {
    let d = parse("exponential(1)");
    let mut v = 0.0;
    unsafe {
        assert_eq!(sp_optimal_proxy(d, SP_SIDE_UPPER, &mut v), SpStatus::Ok);
        assert_eq!(v, f64::INFINITY);
        sp_distribution_free(d);
    }
}

#[test]
fn json_output() {
    let d = parse("bernoulli(0.3)");
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(sp_proxy_json(d, SP_SIDE_TWO_SIDED, &mut s), SpStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        sp_string_free(s);
        sp_distribution_free(d);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["side"], "two_sided");
        assert!((v["value"].as_f64().unwrap() - 0.21).abs() < 1e-9);
    }
}

#[test]
fn parse_errors() {
    let mut d = ptr::null_mut();
    let bad = CString::new("poisson(").unwrap();
    unsafe {
        assert_eq!(sp_distribution_parse(bad.as_ptr(), &mut d), SpStatus::Parse);
        assert!(d.is_null());
        assert!(last_error().contains("position"));
        assert_eq!(sp_distribution_parse(ptr::null(), &mut d), SpStatus::NullPointer);
        let invalid = [0xffu8, 0];
        assert_eq!(sp_distribution_parse(invalid.as_ptr().cast(), &mut d), SpStatus::InvalidUtf8);
        let mut v = 0.0;
        assert_eq!(sp_optimal_proxy(ptr::null(), SP_SIDE_UPPER, &mut v), SpStatus::NullPointer);
    }
}
