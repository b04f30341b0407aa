//! C ABI for csskit.
//!
//! Every function returns a [`CsskitStatus`]; results come back through out
//! pointers. On failure a message is kept per thread and can be fetched with
//! [`csskit_last_error_message`]. Objects are opaque handles owned by the
//! caller and released with the matching `*_free` function. Strings returned
//! by the library are released with [`csskit_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use csskit::io::{self, StateFile};
use csskit::{metrics, Bipartition, CssResult, DensityMatrix, Error, NamedState};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsskitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidState = 4,
    InvalidCss = 5,
    DegenerateInput = 6,
    Numerical = 7,
    Panic = 8,
}

/// A validated density matrix with its subsystem dimensions.
pub struct CsskitState(DensityMatrix);

/// Output of the closest-separable-state solver.
pub struct CsskitResult(CssResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> CsskitStatus {
    match e {
        Error::Parse(_) | Error::UnknownName(_) => CsskitStatus::Parse,
        Error::InvalidState(_) => CsskitStatus::InvalidState,
        Error::InvalidCss { .. } => CsskitStatus::InvalidCss,
        Error::DegenerateInput { .. } => CsskitStatus::DegenerateInput,
        Error::NoConvergence { .. }
        | Error::MaxIterationsExceeded { .. }
        | Error::NotHermitian { .. } => CsskitStatus::Numerical,
        _ => CsskitStatus::InvalidArgument,
    }
}

struct Fail(CsskitStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CsskitStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CsskitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CsskitStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CsskitStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(CsskitStatus::Parse, format!("`{what}` is not UTF-8")))
}

unsafe fn state_ref<'a>(s: *const CsskitState) -> Result<&'a DensityMatrix, Fail> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null("state"))
}

unsafe fn cut_from(
    state: &DensityMatrix,
    side_a: *const usize,
    len: usize,
) -> Result<Bipartition, Fail> {
    let n = state.dims().len();
    if len == 0 {
        return Ok(Bipartition::first_vs_rest(n)?);
    }
    if side_a.is_null() {
        return Err(null("side_a"));
    }
    Ok(Bipartition::new(
        std::slice::from_raw_parts(side_a, len),
        n,
    )?)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(CsskitStatus::Panic, "string contains NUL".into()))
}

/// Message for the last failed call on this thread, or null if the last call
/// succeeded. Free with `csskit_string_free`.
#[no_mangle]
pub extern "C" fn csskit_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(msg) => {
            CString::new(msg.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
        }
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csskit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON state file body (`{"dims": [...], "matrix": [[[re, im], ...], ...]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csskit_state_from_json(
    json: *const c_char,
    out: *mut *mut CsskitState,
) -> CsskitStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let state = io::parse_state(text)?;
        write_out(out, Box::into_raw(Box::new(CsskitState(state))))
    })
}

/// Built-in state by name: `bell`, `ghz`, `w`, `werner(p)`, `max_mixed(2x3)`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csskit_state_named(
    name: *const c_char,
    out: *mut *mut CsskitState,
) -> CsskitStatus {
    guard(|| {
        let name: NamedState = read_str(name, "name")?.parse()?;
        let state = csskit::states::named_state(&name)?;
        write_out(out, Box::into_raw(Box::new(CsskitState(state))))
    })
}

/// Serializes a state to JSON. Free the string with `csskit_string_free`.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csskit_state_to_json(
    state: *const CsskitState,
    out: *mut *mut c_char,
) -> CsskitStatus {
    guard(|| {
        let s = state_ref(state)?;
        write_out(out, into_c_string(io::state_to_json(s))?)
    })
}

/// Total Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csskit_state_dim(state: *const CsskitState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `state` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csskit_state_free(state: *mut CsskitState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Closest separable (PPT) state across the cut whose side A holds the
/// `side_a_len` subsystem indices at `side_a`; `side_a_len == 0` means
/// subsystem 0 against the rest.
///
/// # Safety
/// `state` must be a live handle, `side_a` must point to `side_a_len`
/// indices (or be null when the length is 0), `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csskit_closest_separable(
    state: *const CsskitState,
    side_a: *const usize,
    side_a_len: usize,
    tol: f64,
    out: *mut *mut CsskitResult,
) -> CsskitStatus {
    guard(|| {
        let s = state_ref(state)?;
        let cut = cut_from(s, side_a, side_a_len)?;
        let res = csskit::closest_separable(s, &cut, tol)?;
        write_out(out, Box::into_raw(Box::new(CsskitResult(res))))
    })
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csskit_result_distance_sq(
    result: *const CsskitResult,
    out: *mut f64,
) -> CsskitStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        write_out(out, r.0.distance_sq)
    })
}

/// 1 when PPT certifies separability for this cut (2×2, 2×3), else 0.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csskit_result_is_certified(
    result: *const CsskitResult,
    out: *mut i32,
) -> CsskitStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        write_out(
            out,
            i32::from(r.0.label == csskit::CssLabel::SeparableCertified),
        )
    })
}

/// The closest state as a JSON state file body. Free with `csskit_string_free`.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csskit_result_css_json(
    result: *const CsskitResult,
    out: *mut *mut c_char,
) -> CsskitStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let body =
            serde_json::to_string(&StateFile::from_state(&r.0.css)).expect("state serializes");
        write_out(out, into_c_string(body)?)
    })
}

/// # Safety
/// `result` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csskit_result_free(result: *mut CsskitResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

type Metric = fn(&DensityMatrix, &Bipartition) -> csskit::Result<f64>;

unsafe fn metric(
    state: *const CsskitState,
    side_a: *const usize,
    len: usize,
    out: *mut f64,
    f: Metric,
) -> CsskitStatus {
    guard(|| {
        let s = state_ref(state)?;
        let cut = cut_from(s, side_a, len)?;
        write_out(out, f(s, &cut)?)
    })
}

/// Σ|λ| over the negative eigenvalues of the partial transpose.
///
/// # Safety
/// As for `csskit_closest_separable`.
#[no_mangle]
pub unsafe extern "C" fn csskit_negativity(
    state: *const CsskitState,
    side_a: *const usize,
    side_a_len: usize,
    out: *mut f64,
) -> CsskitStatus {
    metric(state, side_a, side_a_len, out, metrics::negativity)
}

/// Spectral lower bound on the squared distance to the PPT set.
///
/// # Safety
/// As for `csskit_closest_separable`.
#[no_mangle]
pub unsafe extern "C" fn csskit_lower_bound(
    state: *const CsskitState,
    side_a: *const usize,
    side_a_len: usize,
    out: *mut f64,
) -> CsskitStatus {
    metric(state, side_a, side_a_len, out, metrics::lower_bound)
}

/// Squared Hilbert-Schmidt distance to the closest PPT state.
///
/// # Safety
/// As for `csskit_closest_separable`.
#[no_mangle]
pub unsafe extern "C" fn csskit_min_hsd(
    state: *const CsskitState,
    side_a: *const usize,
    side_a_len: usize,
    out: *mut f64,
) -> CsskitStatus {
    metric(state, side_a, side_a_len, out, csskit::min_hsd)
}
