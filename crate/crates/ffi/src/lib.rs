//! C ABI over the tailkit library.
//!
//! Every fallible call returns a `TkStatus` and writes its result through an
//! out-pointer. Handles are opaque and must be released with the matching
//! `*_free` function. The message for the most recent failure on the calling
//! thread is available from `tk_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use tailkit::awgn::{converse_bounds, oracle_converse, AwgnConfig};
use tailkit::dist::{make_beta_prime, make_exponential, make_gaussian, make_noncentral_chi2, DistributionSpec};
use tailkit::engine::{classify, convergence_rate, make_seed, BoundIterate, GridSpec, SeedKind, TailSide, Verdict};
use tailkit::oracle::oracle_ln_tail;
use tailkit::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Param = 3,
    PoleEncountered = 4,
    SeedIncompatible = 5,
    SeedInvalid = 6,
    WindowTooSmall = 7,
    ToleranceNotMet = 8,
    OutOfValidity = 9,
    BracketFailed = 10,
    MgfDiverged = 11,
    JetDivision = 12,
    JetOrder = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkSide {
    Right = 0,
    Left = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkSeed {
    Pdf = 0,
    ShiftedPdf = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TkVerdict {
    Upper = 0,
    Lower = 1,
    Exact = 2,
    #[default]
    Invalid = 3,
}

/// Opaque distribution handle.
pub struct TkDistribution {
    inner: Arc<DistributionSpec>,
}

/// Opaque handle to one iterate P_i.
pub struct TkIterate {
    inner: BoundIterate,
}

/// Opaque AWGN configuration (n, Ω, ε).
pub struct TkAwgn {
    inner: AwgnConfig,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TkClassification {
    pub verdict: TkVerdict,
    /// NaN when the verdict is invalid.
    pub threshold: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TkAwgnPoint {
    pub lambda_p0: f64,
    pub lambda_p1: f64,
    pub lambda_asym: f64,
    pub r_lower: f64,
    pub r_upper: f64,
    pub r_asym: f64,
    pub r_na: f64,
    pub capacity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_last_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut v = e.borrow_mut();
        v.clear();
        v.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(e: &Error) -> TkStatus {
    match e {
        Error::DivisionByZeroJet { .. } => TkStatus::JetDivision,
        Error::OrderExhausted | Error::OrderTooLarge(_) => TkStatus::JetOrder,
        Error::Domain(_) => TkStatus::Domain,
        Error::Param(_) => TkStatus::Param,
        Error::PoleEncountered(_) => TkStatus::PoleEncountered,
        Error::SeedIncompatible(_) => TkStatus::SeedIncompatible,
        Error::SeedInvalid(_) => TkStatus::SeedInvalid,
        Error::WindowTooSmall(_) => TkStatus::WindowTooSmall,
        Error::ToleranceNotMet(_) => TkStatus::ToleranceNotMet,
        Error::OutOfValidity(_) => TkStatus::OutOfValidity,
        Error::BracketFailed(_) => TkStatus::BracketFailed,
        Error::MgfDiverged(_) => TkStatus::MgfDiverged,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> TkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TkStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            TkStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            TkStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

fn side_of(s: TkSide) -> TailSide {
    match s {
        TkSide::Right => TailSide::Right,
        TkSide::Left => TailSide::Left,
    }
}

fn verdict_of(v: Verdict) -> TkVerdict {
    match v {
        Verdict::Upper => TkVerdict::Upper,
        Verdict::Lower => TkVerdict::Lower,
        Verdict::Exact => TkVerdict::Exact,
        Verdict::Invalid => TkVerdict::Invalid,
    }
}

unsafe fn new_dist(out: *mut *mut TkDistribution, d: tailkit::Result<DistributionSpec>) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = ptr::null_mut();
    put_handle(out, TkDistribution { inner: Arc::new(d?) })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn tk_status_str(status: TkStatus) -> *const c_char {
    let s: &'static CStr = match status {
        TkStatus::Ok => c"ok",
        TkStatus::NullPointer => c"null pointer",
        TkStatus::Domain => c"domain error",
        TkStatus::Param => c"invalid parameter",
        TkStatus::PoleEncountered => c"pole encountered",
        TkStatus::SeedIncompatible => c"seed incompatible",
        TkStatus::SeedInvalid => c"seed invalid",
        TkStatus::WindowTooSmall => c"window too small",
        TkStatus::ToleranceNotMet => c"tolerance not met",
        TkStatus::OutOfValidity => c"out of validity",
        TkStatus::BracketFailed => c"bracket failed",
        TkStatus::MgfDiverged => c"mgf diverged",
        TkStatus::JetDivision => c"jet division by zero",
        TkStatus::JetOrder => c"jet order exceeded",
        TkStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies the last error message of this thread into `buf`, NUL-terminated
/// and truncated to `len`. Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_distribution_gaussian(mu: f64, sigma: f64, out: *mut *mut TkDistribution) -> TkStatus {
    guard(|| new_dist(out, make_gaussian(mu, sigma)))
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_distribution_beta_prime(alpha: f64, beta: f64, out: *mut *mut TkDistribution) -> TkStatus {
    guard(|| new_dist(out, make_beta_prime(alpha, beta)))
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_distribution_ncchi2(k: f64, s: f64, out: *mut *mut TkDistribution) -> TkStatus {
    guard(|| new_dist(out, make_noncentral_chi2(k, s)))
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_distribution_exponential(rate: f64, out: *mut *mut TkDistribution) -> TkStatus {
    guard(|| new_dist(out, make_exponential(rate)))
}

/// # Safety
/// `dist` must be null or a handle from a `tk_distribution_*` constructor,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tk_distribution_free(dist: *mut TkDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// # Safety
/// `dist` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_distribution_log_pdf(dist: *const TkDistribution, x: f64, out: *mut f64) -> TkStatus {
    guard(|| {
        let d = get(dist, "dist")?;
        put(out, d.inner.log_pdf(x)?, "out")
    })
}

/// ln of the reference tail 1 − F(x) (right) or F(x) (left).
///
/// # Safety
/// `dist` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_oracle_ln_tail(dist: *const TkDistribution, x: f64, side: TkSide, out: *mut f64) -> TkStatus {
    guard(|| {
        let d = get(dist, "dist")?;
        put(out, oracle_ln_tail(&d.inner, x, side_of(side))?, "out")
    })
}

/// The seed P_0. The distribution handle may be freed afterwards.
///
/// # Safety
/// `dist` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_seed(
    dist: *const TkDistribution,
    seed: TkSeed,
    side: TkSide,
    out: *mut *mut TkIterate,
) -> TkStatus {
    guard(|| {
        let d = get(dist, "dist")?;
        let kind = match seed {
            TkSeed::Pdf => SeedKind::PdfSeed,
            TkSeed::ShiftedPdf => SeedKind::ShiftedPdfSeed,
        };
        let it = make_seed(d.inner.clone(), kind, side_of(side))?;
        put_handle(out, TkIterate { inner: it })
    })
}

/// P_{i+1} from P_i, as a new handle.
///
/// # Safety
/// `it` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_next(it: *const TkIterate, out: *mut *mut TkIterate) -> TkStatus {
    guard(|| {
        let next = get(it, "it")?.inner.iterate()?;
        put_handle(out, TkIterate { inner: next })
    })
}

/// # Safety
/// `it` must be null or a live iterate handle.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_free(it: *mut TkIterate) {
    if !it.is_null() {
        drop(Box::from_raw(it));
    }
}

/// # Safety
/// `it` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_index(it: *const TkIterate, out: *mut usize) -> TkStatus {
    guard(|| put(out, get(it, "it")?.inner.index, "out"))
}

/// # Safety
/// `it` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_ln_value(it: *const TkIterate, x: f64, out: *mut f64) -> TkStatus {
    guard(|| put(out, get(it, "it")?.inner.ln_value(x)?, "out"))
}

/// # Safety
/// `it` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_value(it: *const TkIterate, x: f64, out: *mut f64) -> TkStatus {
    guard(|| put(out, get(it, "it")?.inner.value(x)?, "out"))
}

/// Convergence rate R_i(x) of the pair (P_i, P_{i+1}).
///
/// # Safety
/// `it` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_rate(it: *const TkIterate, x: f64, out: *mut f64) -> TkStatus {
    guard(|| put(out, convergence_rate(&get(it, "it")?.inner, x)?, "out"))
}

/// Classifies the iterate on [a, b] with a grid of `points` points in
/// geometric spacing (uniform when a ≤ 0).
///
/// # Safety
/// `it` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_iterate_classify(
    it: *const TkIterate,
    a: f64,
    b: f64,
    points: usize,
    tol: f64,
    out: *mut TkClassification,
) -> TkStatus {
    guard(|| {
        let c = classify(&get(it, "it")?.inner, (a, b), &GridSpec::geometric(points), tol)?;
        put(out, TkClassification { verdict: verdict_of(c.verdict), threshold: c.threshold }, "out")
    })
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_awgn_new(n: u64, omega: f64, eps: f64, out: *mut *mut TkAwgn) -> TkStatus {
    guard(|| {
        let cfg = AwgnConfig::new(n, omega, eps)?;
        put_handle(out, TkAwgn { inner: cfg })
    })
}

/// # Safety
/// `cfg` must be null or a live AWGN handle.
#[no_mangle]
pub unsafe extern "C" fn tk_awgn_free(cfg: *mut TkAwgn) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_awgn_bounds(cfg: *const TkAwgn, out: *mut TkAwgnPoint) -> TkStatus {
    guard(|| {
        let p = converse_bounds(&get(cfg, "cfg")?.inner)?;
        let point = TkAwgnPoint {
            lambda_p0: p.lambda_p0,
            lambda_p1: p.lambda_p1,
            lambda_asym: p.lambda_asym,
            r_lower: p.r_lower,
            r_upper: p.r_upper,
            r_asym: p.r_asym,
            r_na: p.r_na,
            capacity: p.capacity,
        };
        put(out, point, "out")
    })
}

/// Converse rate from the series oracle. Cost grows with n.
///
/// # Safety
/// `cfg` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tk_awgn_oracle_converse(cfg: *const TkAwgn, out: *mut f64) -> TkStatus {
    guard(|| put(out, oracle_converse(&get(cfg, "cfg")?.inner)?, "out"))
}
