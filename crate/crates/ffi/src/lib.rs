//! C ABI over `gauss_cubature`.
//!
//! Moment sequences and rules are opaque heap handles released with their
//! `*_free` function. Every call returns a [`GcStatus`]; on failure the message
//! is kept per thread and read with [`gc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gauss_cubature::cubature::{multiplication_operators, ExactnessReport};
use gauss_cubature::measures::{catalog_moments, load_moments};
use gauss_cubature::pipeline::{build_rule, run_existence};
use gauss_cubature::rulefile::store_rule;
use gauss_cubature::{
    CubatureOptions, CubatureRule, Error, ErrorClass, MeasureSpec, MomentSequence,
};

/// Status codes; the numeric values match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GcStatus {
    Ok = 0,
    NoCubature = 10,
    InvalidArgument = 20,
    NumericalFailure = 30,
    NullPointer = 40,
    Panic = 50,
}

/// Opaque moment sequence.
pub struct GcMoments(MomentSequence);

/// Opaque cubature rule with its exactness report.
pub struct GcRule {
    rule: CubatureRule,
    report: ExactnessReport,
}

/// Outcome of the existence test.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct GcVerdict {
    pub exists: bool,
    pub relative_residual: f64,
    pub commutation_defect: f64,
    pub rank: usize,
    /// `t_m`, rows of the system.
    pub rows: usize,
    /// `r_{2m}`, unknowns of the system.
    pub cols: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(err: Error) -> GcStatus {
    let status = match err.class() {
        ErrorClass::Input => GcStatus::InvalidArgument,
        ErrorClass::Numerical => GcStatus::NumericalFailure,
    };
    set_error(err.to_string());
    status
}

fn guard(f: impl FnOnce() -> GcStatus) -> GcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            GcStatus::Panic
        }
    }
}

fn null(what: &str) -> GcStatus {
    set_error(format!("{what} is null"));
    GcStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, GcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        GcStatus::InvalidArgument
    })
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Moments of a catalog measure (`lebesgue^2`, `symmetrized:0.5`, ...) up to `d_max`.
///
/// # Safety
/// `spec` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gc_moments_catalog(
    spec: *const c_char,
    d_max: usize,
    out: *mut *mut GcMoments,
) -> GcStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let spec = match str_arg(spec, "spec") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let parsed: MeasureSpec = match spec.parse() {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let seq = match parsed.dim() {
            Some(n) => catalog_moments(&parsed, n, d_max),
            None => Err(Error::InvalidArgument(format!(
                "{spec} is not a catalog measure"
            ))),
        };
        match seq {
            Ok(seq) => {
                *out = Box::into_raw(Box::new(GcMoments(seq)));
                GcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reads a moment file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gc_moments_load(
    path: *const c_char,
    out: *mut *mut GcMoments,
) -> GcStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match str_arg(path, "path") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match load_moments(Path::new(path)) {
            Ok(seq) => {
                *out = Box::into_raw(Box::new(GcMoments(seq)));
                GcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `moments` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gc_moments_free(moments: *mut GcMoments) {
    if !moments.is_null() {
        drop(Box::from_raw(moments));
    }
}

/// Dimension `n`, or 0 for a null handle.
///
/// # Safety
/// `moments` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_moments_dim(moments: *const GcMoments) -> usize {
    moments.as_ref().map_or(0, |m| m.0.dim())
}

/// Highest stored degree, or 0 for a null handle.
///
/// # Safety
/// `moments` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_moments_max_degree(moments: *const GcMoments) -> usize {
    moments.as_ref().map_or(0, |m| m.0.max_degree())
}

/// Existence test for degree `2m - 1`. Returns `NoCubature` when the verdict
/// is negative; `out` is filled in both cases.
///
/// # Safety
/// `moments` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gc_exists(
    moments: *const GcMoments,
    m: usize,
    tol: f64,
    out: *mut GcVerdict,
) -> GcStatus {
    guard(|| {
        let Some(y) = moments.as_ref() else {
            return null("moments");
        };
        if out.is_null() {
            return null("out");
        }
        let run = match run_existence(&y.0, m, tol) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let defect = match multiplication_operators(&run.y, &run.basis, m) {
            Ok(ops) => ops.relative_commutation_defect(),
            Err(e) => return fail(e),
        };
        *out = GcVerdict {
            exists: run.verdict.exists,
            relative_residual: run.verdict.relative_residual,
            commutation_defect: defect,
            rank: run.verdict.rank,
            rows: run.system.rows(),
            cols: run.system.cols(),
        };
        if run.verdict.exists {
            GcStatus::Ok
        } else {
            GcStatus::NoCubature
        }
    })
}

/// Builds the Gaussian rule of degree `2m - 1`.
///
/// # Safety
/// `moments` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gc_cubature(
    moments: *const GcMoments,
    m: usize,
    tol: f64,
    seed: u64,
    out: *mut *mut GcRule,
) -> GcStatus {
    guard(|| {
        let Some(y) = moments.as_ref() else {
            return null("moments");
        };
        if out.is_null() {
            return null("out");
        }
        let opts = CubatureOptions {
            existence_tol: tol,
            seed,
            ..CubatureOptions::default()
        };
        if let Err(e) = opts.validate() {
            return fail(e);
        }
        let run = match run_existence(&y.0, m, tol) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        if !run.verdict.exists {
            set_error(format!(
                "no Gaussian cubature (relative residual {:e})",
                run.verdict.relative_residual
            ));
            return GcStatus::NoCubature;
        }
        match build_rule(&run.y, &run.basis, m, &opts) {
            Ok((rule, report)) => {
                *out = Box::into_raw(Box::new(GcRule { rule, report }));
                GcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `rule` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gc_rule_free(rule: *mut GcRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_rule_dim(rule: *const GcRule) -> usize {
    rule.as_ref().map_or(0, |r| r.rule.n)
}

/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_rule_node_count(rule: *const GcRule) -> usize {
    rule.as_ref().map_or(0, |r| r.rule.nodes.len())
}

/// Largest absolute moment error of the rule up to its precision, or NaN.
///
/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_rule_max_error(rule: *const GcRule) -> f64 {
    rule.as_ref().map_or(f64::NAN, |r| r.report.max_abs_error)
}

/// Copies node coordinates row-major into `buf`, which must hold
/// `node_count * dim` values.
///
/// # Safety
/// `rule` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gc_rule_nodes(rule: *const GcRule, buf: *mut f64, len: usize) -> GcStatus {
    guard(|| {
        let Some(r) = rule.as_ref() else {
            return null("rule");
        };
        let flat: Vec<f64> = r.rule.nodes.iter().flatten().copied().collect();
        copy_out(&flat, buf, len)
    })
}

/// Copies weights into `buf`, which must hold `node_count` values.
///
/// # Safety
/// `rule` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gc_rule_weights(
    rule: *const GcRule,
    buf: *mut f64,
    len: usize,
) -> GcStatus {
    guard(|| {
        let Some(r) = rule.as_ref() else {
            return null("rule");
        };
        copy_out(&r.rule.weights, buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> GcStatus {
    if buf.is_null() {
        return null("buf");
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, {} needed", src.len()));
        return GcStatus::InvalidArgument;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    GcStatus::Ok
}

/// Writes the rule file.
///
/// # Safety
/// `rule` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gc_rule_store(rule: *const GcRule, path: *const c_char) -> GcStatus {
    guard(|| {
        let Some(r) = rule.as_ref() else {
            return null("rule");
        };
        let path = match str_arg(path, "path") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match store_rule(&r.rule, Some(&r.report), Path::new(path)) {
            Ok(()) => GcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}
