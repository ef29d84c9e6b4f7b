//! C ABI over the `gridloss` crate.
//!
//! Networks and solutions are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`GlStatus`]; on failure the message is available from
//! [`gl_last_error_message`] on the same thread. Panics never cross the
//! boundary: they are caught and reported as `GL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gridloss::ga::{run_ga, GaConfig};
use gridloss::{analyze, load_network, Error, LoadFlowSolution, LossReport, Network, SolverOptions, Strategy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    NotFound = 6,
    InvalidArgument = 7,
    SingularJacobian = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Opaque parsed and validated network.
pub struct GlNetwork {
    inner: Network,
}

/// Opaque load-flow result with its loss analysis.
pub struct GlSolution {
    solution: LoadFlowSolution,
    report: LossReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GlStatus {
    match e {
        Error::Io(_) => GlStatus::Io,
        Error::Parse { .. } => GlStatus::Parse,
        Error::Validation(_) => GlStatus::Validation,
        Error::BusNotFound(_) | Error::BranchNotFound { .. } => GlStatus::NotFound,
        Error::SingularJacobian { .. } => GlStatus::SingularJacobian,
        Error::InvalidStrategy { .. } | Error::InvalidConfig(_) | Error::InvalidControl(_) => {
            GlStatus::InvalidArgument
        }
    }
}

fn fail(status: GlStatus, message: &str) -> GlStatus {
    set_last_error(message);
    status
}

/// Run `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), GlStatus>) -> GlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            GlStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(GlStatus::Panic, "internal panic"),
    }
}

fn lift(e: Error) -> GlStatus {
    fail(status_of(&e), &e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, GlStatus> {
    if p.is_null() {
        return Err(fail(GlStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(GlStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, GlStatus> {
    p.as_ref().ok_or_else(|| fail(GlStatus::NullPointer, "null handle"))
}

unsafe fn out_arg<T>(out: *mut *mut T, value: T) -> Result<(), GlStatus> {
    if out.is_null() {
        return Err(fail(GlStatus::NullPointer, "null output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse and validate a case file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_network_from_file(path: *const c_char, out: *mut *mut GlNetwork) -> GlStatus {
    guard(|| {
        let path = str_arg(path)?;
        let bytes = std::fs::read(path).map_err(|e| lift(Error::Io(e)))?;
        let inner = load_network(&bytes).map_err(lift)?;
        out_arg(out, GlNetwork { inner })
    })
}

/// Parse and validate case-file text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_network_from_string(text: *const c_char, out: *mut *mut GlNetwork) -> GlStatus {
    guard(|| {
        let text = str_arg(text)?;
        let inner = load_network(text.as_bytes()).map_err(lift)?;
        out_arg(out, GlNetwork { inner })
    })
}

/// The bundled IEEE 30-bus case.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_network_ieee30(out: *mut *mut GlNetwork) -> GlStatus {
    guard(|| out_arg(out, GlNetwork { inner: gridloss::cases::ieee30() }))
}

/// # Safety
/// `network` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl_network_free(network: *mut GlNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

/// Number of buses; 0 for a null handle.
///
/// # Safety
/// `network` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_network_bus_count(network: *const GlNetwork) -> usize {
    network.as_ref().map_or(0, |n| n.inner.bus_count())
}

/// Number of branches; 0 for a null handle.
///
/// # Safety
/// `network` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_network_branch_count(network: *const GlNetwork) -> usize {
    network.as_ref().map_or(0, |n| n.inner.branches.len())
}

/// New network with a strategy applied, e.g. `load-share:from=5,to=4,frac=0.15`,
/// `q-inject:bus=30,mvar=1.0` or `tap:from=4,to=12,tap=1.0`.
///
/// # Safety
/// `network` must be a live handle, `spec` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_network_apply_strategy(
    network: *const GlNetwork,
    spec: *const c_char,
    out: *mut *mut GlNetwork,
) -> GlStatus {
    guard(|| {
        let network = ref_arg(network)?;
        let strategy: Strategy = str_arg(spec)?.parse().map_err(lift)?;
        let inner = strategy.apply(&network.inner).map_err(lift)?;
        out_arg(out, GlNetwork { inner })
    })
}

/// Newton-Raphson load flow. A non-converged result is still returned with
/// `GL_STATUS_OK`; check [`gl_solution_converged`].
///
/// # Safety
/// `network` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_solve(
    network: *const GlNetwork,
    tolerance: f64,
    max_iterations: usize,
    enforce_q_limits: bool,
    out: *mut *mut GlSolution,
) -> GlStatus {
    guard(|| {
        let network = ref_arg(network)?;
        let options = SolverOptions { tolerance, max_iterations, enforce_q_limits, ..SolverOptions::default() };
        let solution = gridloss::solve(&network.inner, &options).map_err(lift)?;
        let report = analyze(&network.inner, &solution);
        out_arg(out, GlSolution { solution, report })
    })
}

/// # Safety
/// `solution` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl_solution_free(solution: *mut GlSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_solution_converged(solution: *const GlSolution) -> bool {
    solution.as_ref().is_some_and(|s| s.solution.converged)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_solution_iterations(solution: *const GlSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solution.iterations)
}

/// Copy voltage magnitudes (pu) and angles (radians) in bus order into
/// caller buffers of at least `len` entries. Either buffer may be null.
///
/// # Safety
/// Non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_solution_voltages(
    solution: *const GlSolution,
    v_mag: *mut f64,
    v_ang: *mut f64,
    len: usize,
) -> GlStatus {
    guard(|| {
        let s = ref_arg(solution)?;
        let n = s.solution.state.len();
        if len < n {
            return Err(fail(GlStatus::BufferTooSmall, &format!("need {n} entries, got {len}")));
        }
        if !v_mag.is_null() {
            ptr::copy_nonoverlapping(s.solution.state.v_mag.as_ptr(), v_mag, n);
        }
        if !v_ang.is_null() {
            ptr::copy_nonoverlapping(s.solution.state.v_ang.as_ptr(), v_ang, n);
        }
        Ok(())
    })
}

/// Total real (MW) and series reactive (MVAR) branch losses.
///
/// # Safety
/// `solution` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_solution_losses(
    solution: *const GlSolution,
    p_loss_mw: *mut f64,
    q_loss_mvar: *mut f64,
) -> GlStatus {
    guard(|| {
        let s = ref_arg(solution)?;
        if let Some(p) = p_loss_mw.as_mut() {
            *p = s.report.total_p_loss_mw;
        }
        if let Some(q) = q_loss_mvar.as_mut() {
            *q = s.report.total_q_loss_mvar;
        }
        Ok(())
    })
}

/// GA optimal power flow with the default IEEE 30-bus control set and the
/// given seed, population size and generation count. Writes the best real
/// loss in MW (infinity if no candidate converged).
///
/// # Safety
/// `network` must be a live handle and `best_loss_mw` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_run_opf(
    network: *const GlNetwork,
    seed: u64,
    population_size: usize,
    max_generations: usize,
    best_loss_mw: *mut f64,
) -> GlStatus {
    guard(|| {
        let network = ref_arg(network)?;
        let out = best_loss_mw.as_mut().ok_or_else(|| fail(GlStatus::NullPointer, "null output pointer"))?;
        let config = GaConfig { rng_seed: seed, population_size, max_generations, ..GaConfig::default() };
        let result = run_ga(&network.inner, &config, &SolverOptions::default()).map_err(lift)?;
        *out = result.best_loss_mw;
        Ok(())
    })
}
