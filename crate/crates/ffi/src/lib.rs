//! C ABI over `varind`.
//!
//! Objects are opaque handles created by `varind_*_parse`/`varind_decide` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`VarindStatus`]; on failure the message is available from
//! [`varind_last_error`] on the same thread. Strings returned to the caller
//! are owned and released with [`varind_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use varind::independence::{decide, verify_witness, DecideOptions, IndependenceReport, MethodChoice, Verdict};
use varind::{Algebra, Error, Signature, Term};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarindStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed algebra or term text, or inconsistent tables.
    Parse = 3,
    SignatureMismatch = 4,
    /// A hypothesis of the requested method does not hold.
    Precondition = 5,
    /// Bad argument combination.
    Usage = 6,
    LimitExceeded = 7,
    /// The tuple coding space does not fit; use the fast method.
    CodingOverflow = 8,
    /// Internal disagreement or failed self-check.
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarindVerdict {
    Independent = 0,
    NotIndependent = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarindMethod {
    Auto = 0,
    Fast = 1,
    Oracle = 2,
    Both = 3,
}

/// A finite algebra.
pub struct VarindAlgebra(Algebra);

/// The outcome of [`varind_decide`].
pub struct VarindReport {
    report: IndependenceReport,
    signature: Signature,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> VarindStatus {
    match e {
        Error::SignatureMismatch(..) => VarindStatus::SignatureMismatch,
        Error::Precondition(_) => VarindStatus::Precondition,
        Error::Usage(_) | Error::Contract(_) => VarindStatus::Usage,
        Error::LimitExceeded { .. } => VarindStatus::LimitExceeded,
        Error::CodingOverflow { .. } => VarindStatus::CodingOverflow,
        Error::Internal(_) => VarindStatus::Internal,
        _ => VarindStatus::Parse,
    }
}

struct Fail(VarindStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> VarindStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VarindStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside varind");
            VarindStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(VarindStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(VarindStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(VarindStatus::NullPointer, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(VarindStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn varind_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn varind_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an algebra in the text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn varind_algebra_parse(text: *const c_char, out: *mut *mut VarindAlgebra) -> VarindStatus {
    guard(|| {
        out_arg(out, "out")?;
        let alg = Algebra::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(VarindAlgebra(alg)));
        Ok(())
    })
}

/// Releases an algebra; null is ignored.
///
/// # Safety
/// `alg` must come from [`varind_algebra_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varind_algebra_free(alg: *mut VarindAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Carrier size, or 0 for null.
///
/// # Safety
/// `alg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn varind_algebra_size(alg: *const VarindAlgebra) -> usize {
    alg.as_ref().map_or(0, |a| a.0.size())
}

/// Checks whether `term` is a `k`-edge term of `alg`; the answer goes to `out`.
///
/// # Safety
/// `alg` must be a live handle, `term` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn varind_verify_edge_term(
    alg: *const VarindAlgebra,
    term: *const c_char,
    k: usize,
    out: *mut bool,
) -> VarindStatus {
    guard(|| {
        out_arg(out, "out")?;
        let alg = &ref_arg(alg, "alg")?.0;
        let t = Term::parse(str_arg(term, "term")?, alg.signature())?;
        *out = varind::identities::verify_edge_term(alg, &t, k)?;
        Ok(())
    })
}

/// Decides whether `a` and `b` are independent.
///
/// `edge_term` may be null; when given it must be a `k`-edge term of both.
/// `limit` caps closure sizes (0 for the default). `threads` of 0 uses the
/// global pool.
///
/// # Safety
/// `a`, `b` must be live handles, `edge_term` null or NUL-terminated, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn varind_decide(
    a: *const VarindAlgebra,
    b: *const VarindAlgebra,
    method: VarindMethod,
    edge_term: *const c_char,
    k: usize,
    limit: usize,
    threads: usize,
    out: *mut *mut VarindReport,
) -> VarindStatus {
    guard(|| {
        out_arg(out, "out")?;
        let (a, b) = (&ref_arg(a, "a")?.0, &ref_arg(b, "b")?.0);
        a.same_signature(b)?;
        let edge_term = if edge_term.is_null() {
            None
        } else {
            Some(Term::parse(str_arg(edge_term, "edge_term")?, a.signature())?)
        };
        let opts = DecideOptions {
            method: match method {
                VarindMethod::Auto => MethodChoice::Auto,
                VarindMethod::Fast => MethodChoice::Fast,
                VarindMethod::Oracle => MethodChoice::Oracle,
                VarindMethod::Both => MethodChoice::Both,
            },
            k: edge_term.as_ref().map(|_| k),
            edge_term,
            limit: if limit == 0 { DecideOptions::default().limit } else { limit },
            threads: (threads > 0).then_some(threads),
        };
        let report = decide(a, b, &opts)?;
        if let Some(w) = &report.witness {
            if !verify_witness(a, b, w)? {
                return Err(Fail(VarindStatus::Internal, "witness failed re-verification".into()));
            }
        }
        if let Some(cx) = &report.counterexample {
            if !cx.verify(a, b)? {
                return Err(Fail(VarindStatus::Internal, "counterexample failed re-verification".into()));
            }
        }
        let signature = a.signature().clone();
        *out = Box::into_raw(Box::new(VarindReport { report, signature }));
        Ok(())
    })
}

/// Releases a report; null is ignored.
///
/// # Safety
/// `report` must come from [`varind_decide`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varind_report_free(report: *mut VarindReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// The verdict; null is reported as inconclusive.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn varind_report_verdict(report: *const VarindReport) -> VarindVerdict {
    match report.as_ref().map(|r| r.report.verdict) {
        Some(Verdict::Independent) => VarindVerdict::Independent,
        Some(Verdict::NotIndependent) => VarindVerdict::NotIndependent,
        _ => VarindVerdict::Inconclusive,
    }
}

/// The method that produced the verdict, e.g. `fast-edge(3)`; owned string.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn varind_report_method(report: *const VarindReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| owned_string(r.report.method.to_string()))
}

/// The witness term `t(x0, x1)`, or null when there is none; owned string.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn varind_report_witness(report: *const VarindReport) -> *mut c_char {
    report
        .as_ref()
        .and_then(|r| r.report.witness.as_ref().map(|w| owned_string(w.display(&r.signature).to_string())))
        .unwrap_or(ptr::null_mut())
}

/// The counterexample `r=.. s=.. p=.. q=.. missing=..`, or null; owned string.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn varind_report_counterexample(report: *const VarindReport) -> *mut c_char {
    report
        .as_ref()
        .and_then(|r| r.report.counterexample.as_ref().map(|c| owned_string(c.to_string())))
        .unwrap_or(ptr::null_mut())
}

/// Number of closures the fast sweep computed (0 for the oracle alone).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn varind_report_closures(report: *const VarindReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.stats.closures)
}

/// Members the oracle generated, or 0 if it did not run.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn varind_report_oracle_members(report: *const VarindReport) -> usize {
    report
        .as_ref()
        .and_then(|r| r.report.stats.oracle_members)
        .unwrap_or(0)
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varind_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
