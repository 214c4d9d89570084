//! C ABI over slocc-lab.
//!
//! Tensors cross the boundary as opaque `SlTensor` handles. Every call
//! returns an `SlStatus`; on failure a message is kept per thread and can be
//! read with `sl_last_error`. Strings handed out by the library must be
//! released with `sl_string_free`, tensors with `sl_tensor_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use slocc_lab::cwprotocol::{run_protocol, ProtocolConfig};
use slocc_lab::degeneration::{verify_degeneration, w_from_ghz};
use slocc_lab::format::AnyTensor;
use slocc_lab::states::{make_dicke, make_ghz, make_w};
use slocc_lab::support::w_ghz_rate;
use slocc_lab::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    BudgetExceeded = 4,
    VerificationFailed = 5,
    Internal = 6,
}

/// Opaque tensor handle.
pub struct SlTensor {
    inner: AnyTensor,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SlStatus {
    match err {
        Error::Parse(_) => SlStatus::Parse,
        Error::BudgetExceeded { .. } => SlStatus::BudgetExceeded,
        Error::InvalidCertificate(_) => SlStatus::VerificationFailed,
        Error::InvalidArgument(_)
        | Error::DimensionMismatch(_)
        | Error::PartyMismatch { .. }
        | Error::DomainMismatch(_)
        | Error::Precondition(_) => SlStatus::InvalidArgument,
        _ => SlStatus::Internal,
    }
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<SlStatus, (SlStatus, String)>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SlStatus::Internal
        }
    }
}

fn lib<T>(r: slocc_lab::Result<T>) -> Result<T, (SlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SlStatus, String) {
    (SlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (SlStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn tensor_ref<'a>(t: *const SlTensor) -> Result<&'a SlTensor, (SlStatus, String)> {
    t.as_ref().ok_or_else(|| null("tensor handle"))
}

fn boxed(t: impl Into<AnyTensor>) -> *mut SlTensor {
    Box::into_raw(Box::new(SlTensor { inner: t.into() }))
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// GHZ_level on `parties` parties.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_ghz(level: usize, parties: usize, out: *mut *mut SlTensor) -> SlStatus {
    guard(|| {
        let t = lib(make_ghz(level, parties))?;
        write_out(out, boxed(t))?;
        Ok(SlStatus::Ok)
    })
}

/// W state on `parties` parties.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_w(parties: usize, out: *mut *mut SlTensor) -> SlStatus {
    guard(|| {
        let t = lib(make_w(parties))?;
        write_out(out, boxed(t))?;
        Ok(SlStatus::Ok)
    })
}

/// Dicke state: symmetrization of |0^zeros 1^ones⟩.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_dicke(zeros: usize, ones: usize, out: *mut *mut SlTensor) -> SlStatus {
    guard(|| {
        let t = lib(make_dicke(zeros, ones))?;
        write_out(out, boxed(t))?;
        Ok(SlStatus::Ok)
    })
}

/// Parses a tensor file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_from_json(json: *const c_char, out: *mut *mut SlTensor) -> SlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (SlStatus::Parse, e.to_string()))?;
        let t = lib(AnyTensor::parse(text))?;
        write_out(out, boxed(t))?;
        Ok(SlStatus::Ok)
    })
}

/// Serializes a tensor; free the string with `sl_string_free`.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_to_json(t: *const SlTensor, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let t = tensor_ref(t)?;
        let s = CString::new(t.inner.to_json()).map_err(|e| (SlStatus::Internal, e.to_string()))?;
        write_out(out, s.into_raw())?;
        Ok(SlStatus::Ok)
    })
}

/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_parties(t: *const SlTensor, out: *mut usize) -> SlStatus {
    guard(|| {
        let t = tensor_ref(t)?;
        write_out(out, t.inner.parties())?;
        Ok(SlStatus::Ok)
    })
}

/// Number of nonzero entries.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_support_size(t: *const SlTensor, out: *mut usize) -> SlStatus {
    guard(|| {
        let n = match &tensor_ref(t)?.inner {
            AnyTensor::Rational(x) => x.support_size(),
            AnyTensor::Cyclotomic(x) => x.support_size(),
        };
        write_out(out, n)?;
        Ok(SlStatus::Ok)
    })
}

/// Rank of the flattening grouping `sites[0..len]` against the rest.
///
/// # Safety
/// `t` must be a live handle, `sites` valid for `len` reads and `out` valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_flattening_rank(
    t: *const SlTensor,
    sites: *const usize,
    len: usize,
    out: *mut usize,
) -> SlStatus {
    guard(|| {
        let t = tensor_ref(t)?;
        let cut = if len == 0 {
            &[][..]
        } else if sites.is_null() {
            return Err(null("sites"));
        } else {
            std::slice::from_raw_parts(sites, len)
        };
        let r = match &t.inner {
            AnyTensor::Rational(x) => lib(x.flattening_rank(cut))?,
            AnyTensor::Cyclotomic(x) => lib(x.flattening_rank(cut))?,
        };
        write_out(out, r)?;
        Ok(SlStatus::Ok)
    })
}

/// Whether two tensors are exactly equal (same domain, shape and entries).
///
/// # Safety
/// Both handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_equal(a: *const SlTensor, b: *const SlTensor, out: *mut bool) -> SlStatus {
    guard(|| {
        let eq = tensor_ref(a)?.inner == tensor_ref(b)?.inner;
        write_out(out, eq)?;
        Ok(SlStatus::Ok)
    })
}

/// Releases a tensor handle; NULL is ignored.
///
/// # Safety
/// `t` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_tensor_free(t: *mut SlTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Releases a string returned by this library; NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds and verifies the GHZ_2 to W_k certificate, reporting the measured
/// leading and error degrees. Returns `VerificationFailed` if it does not
/// verify.
///
/// # Safety
/// `d` and `e` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_w_certificate_verify(parties: usize, d: *mut usize, e: *mut usize) -> SlStatus {
    guard(|| {
        let cert = lib(w_from_ghz(parties))?;
        let r = lib(verify_degeneration(&cert))?;
        write_out(d, r.measured_d.unwrap_or(0))?;
        write_out(e, r.measured_e.unwrap_or(0))?;
        if r.valid {
            Ok(SlStatus::Ok)
        } else {
            Err((SlStatus::VerificationFailed, r.issues.join("; ")))
        }
    })
}

/// 1 / h(1/k).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_w_ghz_rate(parties: usize, out: *mut f64) -> SlStatus {
    guard(|| {
        let v = lib(w_ghz_rate(parties))?;
        write_out(out, v.value)?;
        Ok(SlStatus::Ok)
    })
}

/// One run of the W-to-GHZ hashing protocol with default parameters.
///
/// # Safety
/// `ghz_level` and `rate` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_cw_run(k: usize, n: usize, seed: u64, ghz_level: *mut usize, rate: *mut f64) -> SlStatus {
    guard(|| {
        let cfg = lib(ProtocolConfig::new(k, n, seed))?;
        let r = lib(run_protocol(&cfg))?;
        write_out(ghz_level, r.n_n)?;
        write_out(rate, r.rate)?;
        Ok(SlStatus::Ok)
    })
}
