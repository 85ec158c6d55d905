//! C interface to `fraisse`.
//!
//! Structures cross the boundary as opaque [`FrStructure`] handles created
//! from canonical JSON or from the generators, and released with
//! [`fr_structure_free`]. Every function returns an [`FrStatus`]; on failure
//! [`fr_last_error_message`] describes the error for the calling thread.
//! Strings handed out by the library are owned by the caller and released
//! with [`fr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fraisse::consistency::is_consistent_with;
use fraisse::io::{structure_from_json, structure_to_json, to_canonical_json};
use fraisse::{
    build_template, condition_holds, find_homomorphism, gen_fn, is_isomorphic, minimal_m,
    AbelianGroup, BoundsParams, ConsistencyOptions, Error, Structure,
};
use num_bigint::BigUint;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    SignatureMismatch = 5,
    Budget = 6,
    Panic = 7,
}

/// Opaque structure handle.
pub struct FrStructure {
    inner: Structure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> FrStatus {
    match err {
        Error::Parse(_) => FrStatus::Parse,
        Error::SignatureMismatch(_) => FrStatus::SignatureMismatch,
        Error::Budget(_) => FrStatus::Budget,
        _ => FrStatus::InvalidArgument,
    }
}

struct Fail(FrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> FrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FrStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(FrStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(FrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(p: *const FrStructure, what: &str) -> Result<&'a Structure, Fail> {
    p.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Fail(FrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(FrStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let s = CString::new(s).map_err(|_| Fail(FrStatus::InvalidArgument, "string contains NUL".into()))?;
    if out.is_null() {
        return Err(Fail(FrStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(s.into_raw());
    Ok(())
}

unsafe fn put_structure(out: *mut *mut FrStructure, s: Structure) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(FrStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(Box::into_raw(Box::new(FrStructure { inner: s })));
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn fr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` is NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a structure document.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_from_json(json: *const c_char, out: *mut *mut FrStructure) -> FrStatus {
    guard(|| {
        let s = structure_from_json(text(json, "json")?)?;
        put_structure(out, s)
    })
}

/// Canonical JSON for `s`; free the result with `fr_string_free`.
///
/// # Safety
/// `s` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_to_json(s: *const FrStructure, out: *mut *mut c_char) -> FrStatus {
    guard(|| {
        let json = structure_to_json(handle(s, "structure")?);
        put_string(out, json)
    })
}

/// # Safety
/// `s` is NULL or a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_free(s: *mut FrStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of elements.
///
/// # Safety
/// `s` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_structure_len(s: *const FrStructure, out: *mut usize) -> FrStatus {
    guard(|| put(out, handle(s, "structure")?.len()))
}

/// The structure `F_n`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_gen_fn(n: usize, out: *mut *mut FrStructure) -> FrStatus {
    guard(|| put_structure(out, gen_fn(n)?))
}

/// The linear-equation template over a group written like `"2"` or `"2x3"`.
///
/// # Safety
/// `group` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_gen_template(group: *const c_char, out: *mut *mut FrStructure) -> FrStatus {
    guard(|| {
        let g: AbelianGroup = text(group, "group")?.parse()?;
        put_structure(out, build_template(&g))
    })
}

/// Searches for a homomorphism from `a` to `b`. Sets `*found`, and when one
/// exists and `map_json` is not NULL, writes the map as a JSON object.
///
/// # Safety
/// `a`, `b` are live handles; `found` is writable; `map_json` is NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fr_find_homomorphism(
    a: *const FrStructure,
    b: *const FrStructure,
    found: *mut bool,
    map_json: *mut *mut c_char,
) -> FrStatus {
    guard(|| {
        let h = find_homomorphism(handle(a, "a")?, handle(b, "b")?)?;
        put(found, h.is_some())?;
        if let (Some(h), false) = (h, map_json.is_null()) {
            put_string(map_json, serde_json::to_string(&h).map_err(|e| Fail(FrStatus::Parse, e.to_string()))?)?;
        }
        Ok(())
    })
}

/// # Safety
/// `a`, `b` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_is_isomorphic(a: *const FrStructure, b: *const FrStructure, out: *mut bool) -> FrStatus {
    guard(|| put(out, is_isomorphic(handle(a, "a")?, handle(b, "b")?)?))
}

/// (k,l)-consistency of `instance` with respect to `tmpl`. A `budget` of
/// 0 uses the library default.
///
/// # Safety
/// `instance`, `tmpl` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_is_consistent(
    instance: *const FrStructure,
    tmpl: *const FrStructure,
    k: usize,
    l: usize,
    budget: usize,
    out: *mut bool,
) -> FrStatus {
    guard(|| {
        let mut opts = ConsistencyOptions::default();
        if budget > 0 {
            opts.budget = budget;
        }
        let v = is_consistent_with(handle(instance, "instance")?, handle(tmpl, "template")?, k, l, &opts)?;
        put(out, v)
    })
}

/// The counting-condition report as JSON.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fr_bounds_report(
    n: u64,
    r: u64,
    t: u64,
    m: u64,
    include_equality: bool,
    out: *mut *mut c_char,
) -> FrStatus {
    guard(|| {
        let mut params = BoundsParams::new(n, r, t, m);
        params.include_equality = include_equality;
        let report = condition_holds(&params)?;
        put_string(out, to_canonical_json(&report)?)
    })
}

/// Least `m ≤ cap` satisfying the counting condition. `*found` is false
/// when there is none.
///
/// # Safety
/// `found` and `out` are writable.
#[no_mangle]
pub unsafe extern "C" fn fr_minimal_m(
    n: u64,
    r: u64,
    t: u64,
    cap: u64,
    include_equality: bool,
    found: *mut bool,
    out: *mut u64,
) -> FrStatus {
    guard(|| {
        let m = minimal_m(n, r, t, &BigUint::from(cap), include_equality)?;
        put(found, m.is_some())?;
        // m ≤ cap, so it fits
        put(out, m.map_or(0, |m| u64::try_from(&m).unwrap()))
    })
}
