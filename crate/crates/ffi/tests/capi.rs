use std::ffi::{c_char, CStr, CString};
use std::ptr;

use varind::catalog::{cyclic_group, group_malcev, lattice2};
use varind_ffi::*;

fn parse(alg: &varind::Algebra) -> *mut VarindAlgebra {
    let text = CString::new(alg.to_text()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { varind_algebra_parse(text.as_ptr(), &mut out) }, VarindStatus::Ok);
    assert!(!out.is_null());
    out
}

fn take(s: *mut c_char) -> Option<String> {
    if s.is_null() {
        return None;
    }
    let owned = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { varind_string_free(s) };
    Some(owned)
}

fn last_error() -> String {
    let p = varind_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn malcev_edge(minus_one: usize) -> CString {
    let t = varind::identities::malcev_to_edge(&group_malcev(minus_one), 2).unwrap();
    CString::new(t.display(&varind::catalog::group_signature()).to_string()).unwrap()
}

#[test]
fn decide_both_methods() {
    let (a, b) = (parse(&cyclic_group(2)), parse(&cyclic_group(3)));
    assert_eq!(unsafe { varind_algebra_size(a) }, 2);
    let edge = malcev_edge(5);
    let mut report = ptr::null_mut();
    let status = unsafe { varind_decide(a, b, VarindMethod::Both, edge.as_ptr(), 2, 0, 1, &mut report) };
    assert_eq!(status, VarindStatus::Ok);
    unsafe {
        assert_eq!(varind_report_verdict(report), VarindVerdict::Independent);
        assert_eq!(take(varind_report_method(report)).as_deref(), Some("both"));
        let w = take(varind_report_witness(report)).unwrap();
        let w = varind::Term::parse(&w, &varind::catalog::group_signature()).unwrap();
        assert!(varind::independence::verify_witness(&cyclic_group(2), &cyclic_group(3), &w).unwrap());
        assert!(take(varind_report_counterexample(report)).is_none());
        assert!(varind_report_closures(report) > 0);
        assert!(varind_report_oracle_members(report) > 0);
        varind_report_free(report);
        varind_algebra_free(a);
        varind_algebra_free(b);
    }
}

#[test]
fn decide_reports_counterexample() {
    let (a, b) = (parse(&cyclic_group(2)), parse(&cyclic_group(4)));
    let mut report = ptr::null_mut();
    let status = unsafe { varind_decide(a, b, VarindMethod::Oracle, ptr::null(), 0, 0, 0, &mut report) };
    assert_eq!(status, VarindStatus::Ok);
    unsafe {
        assert_eq!(varind_report_verdict(report), VarindVerdict::NotIndependent);
        assert!(take(varind_report_witness(report)).is_none());
        assert!(take(varind_report_counterexample(report)).unwrap().starts_with("r="));
        varind_report_free(report);
        varind_algebra_free(a);
        varind_algebra_free(b);
    }
}

#[test]
fn limit_gives_inconclusive() {
    let (a, b) = (parse(&cyclic_group(2)), parse(&cyclic_group(3)));
    let mut report = ptr::null_mut();
    let status = unsafe { varind_decide(a, b, VarindMethod::Oracle, ptr::null(), 0, 3, 0, &mut report) };
    assert_eq!(status, VarindStatus::Ok);
    unsafe {
        assert_eq!(varind_report_verdict(report), VarindVerdict::Inconclusive);
        varind_report_free(report);
        varind_algebra_free(a);
        varind_algebra_free(b);
    }
}

#[test]
fn error_codes() {
    let mut alg = ptr::null_mut();
    let bad = CString::new("size 2\nop + 2\nvalues 0 1 1").unwrap();
    assert_eq!(unsafe { varind_algebra_parse(bad.as_ptr(), &mut alg) }, VarindStatus::Parse);
    assert!(alg.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { varind_algebra_parse(ptr::null(), &mut alg) }, VarindStatus::NullPointer);
    let bytes = b"\xff\0";
    assert_eq!(
        unsafe { varind_algebra_parse(bytes.as_ptr().cast(), &mut alg) },
        VarindStatus::InvalidUtf8
    );

    let (z2, l2) = (parse(&cyclic_group(2)), parse(&lattice2()));
    let mut report = ptr::null_mut();
    unsafe {
        let s = varind_decide(z2, l2, VarindMethod::Auto, ptr::null(), 0, 0, 0, &mut report);
        assert_eq!(s, VarindStatus::SignatureMismatch);
        assert!(report.is_null());
        let s = varind_decide(z2, z2, VarindMethod::Fast, ptr::null(), 0, 0, 0, &mut report);
        assert_eq!(s, VarindStatus::Usage);
        // 5·x1 is not −x1 modulo 4.
        let z4 = parse(&cyclic_group(4));
        let edge = malcev_edge(5);
        let s = varind_decide(z2, z4, VarindMethod::Fast, edge.as_ptr(), 2, 0, 0, &mut report);
        assert_eq!(s, VarindStatus::Precondition);
        varind_algebra_free(z2);
        varind_algebra_free(l2);
        varind_algebra_free(z4);
        // Null handles are tolerated by the accessors.
        varind_algebra_free(ptr::null_mut());
        varind_report_free(ptr::null_mut());
        varind_string_free(ptr::null_mut());
        assert_eq!(varind_report_verdict(ptr::null()), VarindVerdict::Inconclusive);
        assert!(varind_report_witness(ptr::null()).is_null());
    }
}

#[test]
fn verify_edge_term() {
    let z3 = parse(&cyclic_group(3));
    let mut ok = false;
    unsafe {
        let edge = malcev_edge(2);
        assert_eq!(varind_verify_edge_term(z3, edge.as_ptr(), 2, &mut ok), VarindStatus::Ok);
        assert!(ok);
        let sum = CString::new("(+ x0 (+ x1 x2))").unwrap();
        assert_eq!(varind_verify_edge_term(z3, sum.as_ptr(), 2, &mut ok), VarindStatus::Ok);
        assert!(!ok);
        let junk = CString::new("(+ x0").unwrap();
        assert_eq!(varind_verify_edge_term(z3, junk.as_ptr(), 2, &mut ok), VarindStatus::Parse);
        varind_algebra_free(z3);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(varind_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/varind.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 10);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct VarindAlgebra VarindAlgebra;"));
}
