//! C ABI for `cardproto`.
//!
//! Protocols are opaque handles created by `cp_protocol_builtin` or
//! `cp_protocol_from_script` and released with `cp_protocol_free`. Every
//! fallible call returns a [`CpStatus`]; on failure `cp_last_error` holds a
//! message for the calling thread. Strings handed out by the library must be
//! released with `cp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cardproto::analyzer::{build_report, count_resources, Options, Prior};
use cardproto::protocol::{builtin, BuiltinParams, Protocol};
use cardproto::Error;

/// Result of a library call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpStatus {
    Ok = 0,
    /// A required pointer was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Unknown protocol, bad parameters, malformed JSON or prior.
    InvalidArgument = 3,
    /// The script did not parse or failed a static check.
    ScriptRejected = 4,
    /// Enumeration ran past its step budget.
    BudgetExceeded = 5,
    /// The analysis finished and found a correctness or security failure.
    CheckFailed = 6,
    /// An internal error; the message says more.
    Internal = 7,
}

/// A protocol ready for analysis.
pub struct CpProtocol(Protocol);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(CpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Budget { .. } | Error::InputBudget { .. } => CpStatus::BudgetExceeded,
            _ => CpStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<CpStatus, Fail>) -> CpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == CpStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CpStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(CpStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(p: *const CpProtocol) -> Result<&'a Protocol, Fail> {
    p.as_ref()
        .map(|h| &h.0)
        .ok_or_else(|| Fail(CpStatus::NullArgument, "protocol handle is null".into()))
}

fn out_ptr<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail(
            CpStatus::NullArgument,
            "output pointer is null".into(),
        ))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

/// Builds a built-in protocol. `params_json` may be null or a JSON object
/// with optional keys `n`, `k` and `g`.
///
/// # Safety
/// `name` and `params_json` must be null or NUL-terminated strings; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_protocol_builtin(
    name: *const c_char,
    params_json: *const c_char,
    out: *mut *mut CpProtocol,
) -> CpStatus {
    guard(|| {
        out_ptr(out)?;
        let name = text(name, "name")?;
        let params: BuiltinParams = if params_json.is_null() {
            BuiltinParams::default()
        } else {
            serde_json::from_str(text(params_json, "params_json")?)
                .map_err(|e| Fail(CpStatus::InvalidArgument, format!("bad params: {e}")))?
        };
        let p = builtin(name, &params)?;
        *out = Box::into_raw(Box::new(CpProtocol(p)));
        Ok(CpStatus::Ok)
    })
}

/// Parses and checks a `.cardp` script.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_protocol_from_script(
    source: *const c_char,
    out: *mut *mut CpProtocol,
) -> CpStatus {
    guard(|| {
        out_ptr(out)?;
        let source = text(source, "source")?;
        let p = cardproto::script::load(source).map_err(|d| {
            Fail(
                CpStatus::ScriptRejected,
                cardproto::script::render_diagnostics("<script>", &d),
            )
        })?;
        *out = Box::into_raw(Box::new(CpProtocol(p)));
        Ok(CpStatus::Ok)
    })
}

/// Releases a protocol. Null is ignored.
///
/// # Safety
/// `protocol` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cp_protocol_free(protocol: *mut CpProtocol) {
    if !protocol.is_null() {
        drop(Box::from_raw(protocol));
    }
}

/// Number of cards the protocol uses, or 0 for a null handle.
///
/// # Safety
/// `protocol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cp_protocol_card_count(protocol: *const CpProtocol) -> usize {
    protocol.as_ref().map_or(0, |h| h.0.card_count())
}

/// Writes the resource count as a JSON string to `out_json`.
///
/// # Safety
/// `protocol` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_protocol_resources(
    protocol: *const CpProtocol,
    out_json: *mut *mut c_char,
) -> CpStatus {
    guard(|| {
        out_ptr(out_json)?;
        let p = handle(protocol)?;
        let r = count_resources(p)?;
        *out_json = c_string(serde_json::to_string(&r).expect("resources serialize"));
        Ok(CpStatus::Ok)
    })
}

/// Runs the full analysis and writes the report as JSON to `out_json`.
///
/// `budget` is the per-input step budget (0 for the default). `prior` may be
/// null; otherwise posterior tables are included, observing the first
/// `depth` reveals or whole traces when `depth` is negative. Returns
/// `CP_STATUS_CHECK_FAILED` when the report is written but does not pass.
///
/// # Safety
/// `protocol` must be a live handle, `prior` null or a NUL-terminated
/// string, and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_protocol_verify_json(
    protocol: *const CpProtocol,
    budget: u64,
    prior: *const c_char,
    depth: i64,
    out_json: *mut *mut c_char,
) -> CpStatus {
    guard(|| {
        out_ptr(out_json)?;
        let p = handle(protocol)?;
        let mut opts = Options::from_env()?;
        if budget > 0 {
            opts.budget = budget;
        }
        let prior = if prior.is_null() {
            None
        } else {
            Some(Prior::parse(text(prior, "prior")?, *p.domain())?)
        };
        let depth = usize::try_from(depth).ok();
        let report = build_report(p, &opts, prior.as_ref().map(|pr| (pr, depth)))?;
        let pass = report.pass();
        *out_json = c_string(report.to_json());
        Ok(if pass {
            CpStatus::Ok
        } else {
            CpStatus::CheckFailed
        })
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn cp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
