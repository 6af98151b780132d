//! C interface to the `heattrace` library.
//!
//! Every function returns an [`HtStatus`]. On failure a message is kept per
//! thread and can be read with [`ht_last_error`]. Handles are opaque and must
//! be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heattrace::expansion::expansion_coefficient;
use heattrace::group_duals::{FamilyType, GroupFamily};
use heattrace::heat_trace::{central_heat_trace, limit_trace, TraceRequest};
use heattrace::hurwitz::HurwitzTable;
use heattrace::{CertifiedValue, Error};

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    /// An argument lies outside the mathematical domain (e.g. `t <= 0`).
    Domain = 1,
    /// An argument is malformed (wrong size for the family, bad label, ...).
    Validation = 2,
    CutoffTooSmall = 3,
    /// The request needs more work or memory than the library allows.
    Resource = 4,
    Convergence = 5,
    NullPointer = 6,
    /// The output buffer is too small; the required size was reported.
    BufferTooSmall = 7,
    Panic = 8,
}

/// Classical group families; functions take these as `uint32_t` codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HtFamily {
    /// The full unitary group U(N).
    APrime = 0,
    A = 1,
    B = 2,
    C = 3,
    D = 4,
}

fn family(code: u32) -> Result<FamilyType, HtStatus> {
    Ok(match code {
        c if c == HtFamily::APrime as u32 => FamilyType::APrime,
        c if c == HtFamily::A as u32 => FamilyType::A,
        c if c == HtFamily::B as u32 => FamilyType::B,
        c if c == HtFamily::C as u32 => FamilyType::C,
        c if c == HtFamily::D as u32 => FamilyType::D,
        _ => {
            set_error(&format!("unknown family code {code}"));
            return Err(HtStatus::Validation);
        }
    })
}

/// A value `hi + lo` with a rigorous bound on the discarded tail.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HtCertified {
    pub hi: f64,
    pub lo: f64,
    pub tail_bound: f64,
    pub cutoff: usize,
}

impl From<CertifiedValue> for HtCertified {
    fn from(v: CertifiedValue) -> Self {
        Self {
            hi: v.value.hi(),
            lo: v.value.lo(),
            tail_bound: v.tail_bound,
            cutoff: v.cutoff,
        }
    }
}

/// Opaque heat-trace request.
pub struct HtTraceRequest(TraceRequest);

/// Opaque table of exact Hurwitz numbers.
pub struct HtHurwitzTable(HurwitzTable);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HtStatus {
    match e {
        Error::Domain(_) => HtStatus::Domain,
        Error::Validation(_) => HtStatus::Validation,
        Error::CutoffTooSmall(_) => HtStatus::CutoffTooSmall,
        Error::Resource { .. } => HtStatus::Resource,
        Error::Convergence(_) => HtStatus::Convergence,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), HtStatus>) -> HtStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HtStatus::Panic
        }
    }
}

fn lift<T>(r: heattrace::Result<T>) -> Result<T, HtStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn null_check<T>(p: *const T, name: &str) -> Result<(), HtStatus> {
    if p.is_null() {
        set_error(&format!("{name} is null"));
        return Err(HtStatus::NullPointer);
    }
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ht_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Creates a request for the heat trace of `family` at matrix size `n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_trace_request_new(
    family_code: u32,
    n: u32,
    t: f64,
    tol: f64,
    out: *mut *mut HtTraceRequest,
) -> HtStatus {
    guard(|| {
        null_check(out, "out")?;
        let g = lift(GroupFamily::new(family(family_code)?, n))?;
        let req = lift(TraceRequest::new(g, t, tol))?;
        *out = Box::into_raw(Box::new(HtTraceRequest(req)));
        Ok(())
    })
}

/// Releases a request; null is ignored.
///
/// # Safety
/// `req` must come from [`ht_trace_request_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ht_trace_request_free(req: *mut HtTraceRequest) {
    if !req.is_null() {
        drop(Box::from_raw(req));
    }
}

/// Evaluates the certified heat trace.
///
/// # Safety
/// `req` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_trace_evaluate(req: *const HtTraceRequest, out: *mut HtCertified) -> HtStatus {
    guard(|| {
        null_check(req, "req")?;
        null_check(out, "out")?;
        *out = lift(central_heat_trace(&(*req).0))?.into();
        Ok(())
    })
}

/// Large-N limit of the heat trace.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_limit_trace(family_code: u32, t: f64, out: *mut HtCertified) -> HtStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = lift(limit_trace(family(family_code)?, t))?.into();
        Ok(())
    })
}

/// Coefficient of `N^{-k}` in the large-N expansion, to absolute tolerance `tol`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_expansion_coefficient(
    family_code: u32,
    t: f64,
    k: u32,
    tol: f64,
    out: *mut HtCertified,
) -> HtStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = lift(expansion_coefficient(family(family_code)?, t, k, tol))?.into();
        Ok(())
    })
}

/// Builds the exact Hurwitz numbers for `1 <= n <= n_max`, even `k <= k_max`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_hurwitz_table_new(n_max: u32, k_max: u32, out: *mut *mut HtHurwitzTable) -> HtStatus {
    guard(|| {
        null_check(out, "out")?;
        let table = lift(HurwitzTable::build(n_max, k_max))?;
        *out = Box::into_raw(Box::new(HtHurwitzTable(table)));
        Ok(())
    })
}

/// Releases a table; null is ignored.
///
/// # Safety
/// `table` must come from [`ht_hurwitz_table_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ht_hurwitz_table_free(table: *mut HtHurwitzTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Writes `H_1(n, k)` as NUL-terminated decimal text into `buf`.
/// `needed` (optional) receives the required buffer size including the NUL.
///
/// # Safety
/// `table` must be a live handle; `buf` must point to `len` writable bytes
/// (it may be null when `len` is 0); `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn ht_hurwitz_table_get(
    table: *const HtHurwitzTable,
    n: u32,
    k: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HtStatus {
    guard(|| {
        null_check(table, "table")?;
        let t = &(*table).0;
        let Some(value) = t.get(n, k) else {
            set_error(&format!("(n={n}, k={k}) lies outside the table (n_max={}, k_max={})", t.n_max(), t.k_max()));
            return Err(HtStatus::Validation);
        };
        let text = value.to_string();
        let size = text.len() + 1;
        if !needed.is_null() {
            *needed = size;
        }
        if len < size {
            set_error(&format!("buffer of {len} bytes is too small, need {size}"));
            return Err(HtStatus::BufferTooSmall);
        }
        null_check(buf, "buf")?;
        ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}
