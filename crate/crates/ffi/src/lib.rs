//! C interface to `weylbc`.
//!
//! Objects are opaque handles created by `*_new`/`*_solve`/`*_from_json`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`WeylbcStatus`]; the message of the last failure on the calling
//! thread is available through [`weylbc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use weylbc::amplitude::solve_amplitude;
use weylbc::oracle::{m_riccati, OracleConfig};
use weylbc::potential::convergence_threshold;
use weylbc::response::response_kernel_from_amplitude;
use weylbc::spectral::{m_from_amplitude_with, SpectralOptions};
use weylbc::{AmplitudeProfile, Complex64, Error, Method, Potential};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeylbcStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad input: malformed potential, step/extent mismatch, alignment.
    Config = 2,
    /// Solver breakdown: degenerate step, divergent series, blow-up.
    Solver = 3,
    /// Outside the verified domain, e.g. below the convergence threshold.
    Domain = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Solver selection for [`weylbc_amplitude_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeylbcMethod {
    March = 0,
    Neumann = 1,
}

/// `m(-k²)` with its error certificates.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeylbcMEvaluation {
    pub re_k: f64,
    pub im_k: f64,
    pub re_m: f64,
    pub im_m: f64,
    pub alpha_max: f64,
    pub quadrature_estimate: f64,
    /// Infinite when evaluated below the convergence threshold.
    pub tail_bound: f64,
}

pub struct WeylbcPotential(Potential);

pub struct WeylbcAmplitude(AmplitudeProfile);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(e: &Error) -> WeylbcStatus {
    match e.exit_code() {
        3 => WeylbcStatus::Solver,
        4 => WeylbcStatus::Domain,
        _ => WeylbcStatus::Config,
    }
}

fn fail(status: WeylbcStatus, message: impl Into<String>) -> WeylbcStatus {
    set_error(message.into());
    status
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), WeylbcStatus>) -> WeylbcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WeylbcStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(WeylbcStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> WeylbcStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, WeylbcStatus> {
    p.as_ref()
        .ok_or_else(|| fail(WeylbcStatus::NullPointer, format!("{what} is null")))
}

fn non_null<T>(p: *mut T, what: &str) -> Result<(), WeylbcStatus> {
    if p.is_null() {
        Err(fail(WeylbcStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Copies `values` into `buffer`; `written` always receives the full length.
unsafe fn copy_out(
    values: &[f64],
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> Result<(), WeylbcStatus> {
    if !written.is_null() {
        *written = values.len();
    }
    if capacity < values.len() {
        return Err(fail(
            WeylbcStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", values.len()),
        ));
    }
    non_null(buffer, "buffer")?;
    ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn weylbc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buffer` (truncated,
/// always NUL-terminated when `capacity > 0`). Returns the full message
/// length excluding the terminator.
///
/// # Safety
/// `buffer` must be valid for `capacity` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn weylbc_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let message = e.borrow();
        if !buffer.is_null() && capacity > 0 {
            let n = message.len().min(capacity - 1);
            ptr::copy_nonoverlapping(message.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        message.len()
    })
}

/// `2·max{√(2‖q‖), e‖q‖}`.
#[no_mangle]
pub extern "C" fn weylbc_convergence_threshold(norm_q: f64) -> f64 {
    convergence_threshold(norm_q)
}

/// Parses a potential from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn weylbc_potential_from_json(
    json: *const c_char,
    out: *mut *mut WeylbcPotential,
) -> WeylbcStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(fail(WeylbcStatus::NullPointer, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(WeylbcStatus::Config, "json is not UTF-8"))?;
        let q = Potential::from_json(text).map_err(lib)?;
        *out = Box::into_raw(Box::new(WeylbcPotential(q)));
        Ok(())
    })
}

/// # Safety
/// `potential` must come from [`weylbc_potential_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn weylbc_potential_free(potential: *mut WeylbcPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// Unit-window norm `sup ∫ₓ^{x+1} |q|`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn weylbc_potential_norm(
    potential: *const WeylbcPotential,
    out: *mut f64,
) -> WeylbcStatus {
    guard(|| {
        let q = borrow(potential, "potential")?;
        non_null(out, "out")?;
        *out = q.0.local_l1_norm();
        Ok(())
    })
}

/// `q(x)`, right-continuous at jumps.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn weylbc_potential_eval(
    potential: *const WeylbcPotential,
    x: f64,
    out: *mut f64,
) -> WeylbcStatus {
    guard(|| {
        let q = borrow(potential, "potential")?;
        non_null(out, "out")?;
        *out = q.0.eval(x);
        Ok(())
    })
}

/// Solves for the A-amplitude on `[0, x_max]` with step `step`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn weylbc_amplitude_solve(
    potential: *const WeylbcPotential,
    x_max: f64,
    step: f64,
    method: WeylbcMethod,
    tol: f64,
    out: *mut *mut WeylbcAmplitude,
) -> WeylbcStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let q = borrow(potential, "potential")?;
        let method = match method {
            WeylbcMethod::March => Method::March,
            WeylbcMethod::Neumann => Method::Neumann { terms: 0 },
        };
        let profile = solve_amplitude(&q.0, x_max, step, method, tol).map_err(lib)?;
        *out = Box::into_raw(Box::new(WeylbcAmplitude(profile)));
        Ok(())
    })
}

/// # Safety
/// `amplitude` must come from [`weylbc_amplitude_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn weylbc_amplitude_free(amplitude: *mut WeylbcAmplitude) {
    if !amplitude.is_null() {
        drop(Box::from_raw(amplitude));
    }
}

/// Number of samples, `n + 1`; 0 for a null handle.
///
/// # Safety
/// `amplitude` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn weylbc_amplitude_len(amplitude: *const WeylbcAmplitude) -> usize {
    amplitude.as_ref().map_or(0, |a| a.0.len())
}

/// Grid step; NaN for a null handle.
///
/// # Safety
/// `amplitude` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn weylbc_amplitude_step(amplitude: *const WeylbcAmplitude) -> f64 {
    amplitude.as_ref().map_or(f64::NAN, |a| a.0.h)
}

/// Copies `A(j·h)` into `buffer`.
///
/// # Safety
/// `buffer` must hold `capacity` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn weylbc_amplitude_copy(
    amplitude: *const WeylbcAmplitude,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> WeylbcStatus {
    guard(|| {
        copy_out(
            &borrow(amplitude, "amplitude")?.0.samples,
            buffer,
            capacity,
            written,
        )
    })
}

/// Copies the exponential bound on `|A - q|` at each node.
///
/// # Safety
/// As [`weylbc_amplitude_copy`].
#[no_mangle]
pub unsafe extern "C" fn weylbc_amplitude_copy_bound(
    amplitude: *const WeylbcAmplitude,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> WeylbcStatus {
    guard(|| {
        copy_out(
            &borrow(amplitude, "amplitude")?.0.bound,
            buffer,
            capacity,
            written,
        )
    })
}

/// Copies the response kernel `r(j·h_t)`, `h_t = 2h`.
///
/// # Safety
/// As [`weylbc_amplitude_copy`].
#[no_mangle]
pub unsafe extern "C" fn weylbc_response_kernel_copy(
    amplitude: *const WeylbcAmplitude,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> WeylbcStatus {
    guard(|| {
        let r = response_kernel_from_amplitude(&borrow(amplitude, "amplitude")?.0);
        copy_out(&r.samples, buffer, capacity, written)
    })
}

/// Evaluates `m(-k²)`. A positive `tail_tol` truncates at the shortest
/// extent whose tail bound meets it; otherwise the whole grid is used.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn weylbc_m_from_amplitude(
    amplitude: *const WeylbcAmplitude,
    potential: *const WeylbcPotential,
    re_k: f64,
    im_k: f64,
    tail_tol: f64,
    allow_unverified: bool,
    out: *mut WeylbcMEvaluation,
) -> WeylbcStatus {
    guard(|| {
        let a = borrow(amplitude, "amplitude")?;
        let q = borrow(potential, "potential")?;
        non_null(out, "out")?;
        let opts = SpectralOptions {
            tail_tol: (tail_tol > 0.0).then_some(tail_tol),
            allow_unverified,
        };
        let e =
            m_from_amplitude_with(&a.0, &q.0, Complex64::new(re_k, im_k), &opts).map_err(lib)?;
        *out = WeylbcMEvaluation {
            re_k,
            im_k,
            re_m: e.m.re,
            im_m: e.m.im,
            alpha_max: e.alpha_max,
            quadrature_estimate: e.quadrature_estimate,
            tail_bound: e.tail_bound,
        };
        Ok(())
    })
}

/// Reference `m(-k²)` by backward Riccati integration with RK4 step `step`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn weylbc_m_riccati(
    potential: *const WeylbcPotential,
    re_k: f64,
    im_k: f64,
    step: f64,
    re_m: *mut f64,
    im_m: *mut f64,
) -> WeylbcStatus {
    guard(|| {
        let q = borrow(potential, "potential")?;
        non_null(re_m, "re_m")?;
        non_null(im_m, "im_m")?;
        let cfg = OracleConfig::for_potential(&q.0, step).map_err(lib)?;
        let m = m_riccati(&q.0, Complex64::new(re_k, im_k), &cfg).map_err(lib)?;
        *re_m = m.re;
        *im_m = m.im;
        Ok(())
    })
}
