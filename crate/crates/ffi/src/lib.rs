//! C ABI over `biot-core`.
//!
//! Every fallible function returns a [`BiotStatus`]; on failure the message
//! is kept per thread and can be read with [`biot_last_error_message`].
//! Objects are opaque handles owned by the caller and released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use biot_core::bench::{mandel_pressure, run_case, CaseSpec, MandelConfig, SolveReport};
use biot_core::biot::{BiotSystem, Variant};
use biot_core::la::LinearOperator;
use biot_core::mesh::ProblemKind;
use biot_core::precond::{BlockPreconditioner, PrecondId};
use biot_core::BiotError;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiotStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Singular = 4,
    NotConverged = 5,
    Io = 6,
    Internal = 7,
}

impl From<&BiotError> for BiotStatus {
    fn from(e: &BiotError) -> Self {
        match e {
            BiotError::DimensionMismatch { .. } => BiotStatus::DimensionMismatch,
            BiotError::Singular { .. } | BiotError::NotPositiveDefinite => BiotStatus::Singular,
            BiotError::InvalidParameter(_) | BiotError::Parse(_) | BiotError::NotSymmetric { .. } => {
                BiotStatus::InvalidArgument
            }
            BiotError::TooLarge { .. } | BiotError::Nonlinear(_) => BiotStatus::InvalidArgument,
            BiotError::Io(_) => BiotStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: BiotStatus, msg: impl Into<String>) -> BiotStatus {
    set_error(msg);
    status
}

fn from_error(e: BiotError) -> BiotStatus {
    fail(BiotStatus::from(&e), e.to_string())
}

/// Runs `f`, turning panics into [`BiotStatus::Internal`].
fn guard(f: impl FnOnce() -> BiotStatus) -> BiotStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(BiotStatus::Internal, "panic inside biot-core"),
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, BiotStatus> {
    if s.is_null() {
        return Err(fail(BiotStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(BiotStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// One benchmark configuration.
pub struct BiotCase {
    spec: CaseSpec,
}

/// Result of one benchmark solve.
pub struct BiotReport {
    report: SolveReport,
}

/// An assembled system at a fixed time step.
pub struct BiotSystemHandle {
    sys: BiotSystem,
    rhs: Vec<f64>,
}

/// A block preconditioner built for a system.
pub struct BiotPreconditioner {
    prec: BlockPreconditioner,
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn biot_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn biot_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a case for `problem` (`"mandel2d"` or `"footing3d"`) with `n`
/// cells per side, time step `tau` and preconditioner id (`"bd"`, `"bl"`,
/// `"bu"`, `"bde"`, `"ble"`, `"bue"`).
///
/// # Safety
/// `problem` and `precond` must be valid NUL-terminated strings; `out` must
/// be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn biot_case_new(
    problem: *const c_char,
    n: u32,
    tau: f64,
    precond: *const c_char,
    out: *mut *mut BiotCase,
) -> BiotStatus {
    guard(|| {
        if out.is_null() {
            return fail(BiotStatus::NullPointer, "out is null");
        }
        let problem: ProblemKind = match str_arg(problem, "problem").map(str::parse) {
            Ok(Ok(p)) => p,
            Ok(Err(e)) => return from_error(e),
            Err(s) => return s,
        };
        let precond: PrecondId = match str_arg(precond, "precond").map(str::parse) {
            Ok(Ok(p)) => p,
            Ok(Err(e)) => return from_error(e),
            Err(s) => return s,
        };
        if n == 0 || !(tau > 0.0) {
            return fail(BiotStatus::InvalidArgument, "n and tau must be positive");
        }
        let mut spec = CaseSpec::new(problem, n as usize, tau, precond);
        if problem == ProblemKind::Footing3d {
            spec = spec.with_nu(0.2);
        }
        *out = Box::into_raw(Box::new(BiotCase { spec }));
        BiotStatus::Ok
    })
}

/// # Safety
/// `handle` must be null or a handle from [`biot_case_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn biot_case_free(handle: *mut BiotCase) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Sets Poisson ratio and permeability.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_case_set_material(handle: *mut BiotCase, nu: f64, k: f64) -> BiotStatus {
    guard(|| match handle.as_mut() {
        None => fail(BiotStatus::NullPointer, "case is null"),
        Some(c) => {
            c.spec = c.spec.with_nu(nu).with_k(k);
            BiotStatus::Ok
        }
    })
}

/// Sets the permeability for `x ≥ 0.5` (footing only); a negative value
/// removes the jump.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_case_set_jump(handle: *mut BiotCase, k_right: f64) -> BiotStatus {
    guard(|| match handle.as_mut() {
        None => fail(BiotStatus::NullPointer, "case is null"),
        Some(c) => {
            c.spec = c.spec.with_k_jump((k_right >= 0.0).then_some(k_right));
            BiotStatus::Ok
        }
    })
}

/// Selects inexact (AMG / inner Krylov) sub-solvers.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_case_set_inexact(handle: *mut BiotCase, inexact: bool) -> BiotStatus {
    guard(|| match handle.as_mut() {
        None => fail(BiotStatus::NullPointer, "case is null"),
        Some(c) => {
            c.spec = c.spec.with_inexact(inexact);
            BiotStatus::Ok
        }
    })
}

/// Selects the system variant: `"full"`, `"diag"` or `"elim"`.
///
/// # Safety
/// `handle` must be a live handle and `variant` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn biot_case_set_variant(handle: *mut BiotCase, variant: *const c_char) -> BiotStatus {
    guard(|| {
        let Some(c) = handle.as_mut() else {
            return fail(BiotStatus::NullPointer, "case is null");
        };
        match str_arg(variant, "variant").map(str::parse::<Variant>) {
            Ok(Ok(v)) => {
                c.spec = c.spec.with_variant(v);
                BiotStatus::Ok
            }
            Ok(Err(e)) => from_error(e),
            Err(s) => s,
        }
    })
}

/// Outer FGMRES relative tolerance and iteration cap.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_case_set_solver(handle: *mut BiotCase, tol: f64, max_iter: u32) -> BiotStatus {
    guard(|| match handle.as_mut() {
        None => fail(BiotStatus::NullPointer, "case is null"),
        Some(_) if !(tol > 0.0) || max_iter == 0 => {
            fail(BiotStatus::InvalidArgument, "tolerance and iteration cap must be positive")
        }
        Some(c) => {
            c.spec.tol = tol;
            c.spec.max_iter = max_iter as usize;
            BiotStatus::Ok
        }
    })
}

/// Assembles, preconditions and solves the case. A report is returned also
/// when the solve does not converge (status [`BiotStatus::NotConverged`]).
///
/// # Safety
/// `handle` must be a live handle; `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn biot_run(handle: *const BiotCase, out: *mut *mut BiotReport) -> BiotStatus {
    guard(|| {
        let (Some(c), false) = (handle.as_ref(), out.is_null()) else {
            return fail(BiotStatus::NullPointer, "case or out is null");
        };
        match run_case(&c.spec) {
            Ok(report) => {
                let converged = report.converged;
                *out = Box::into_raw(Box::new(BiotReport { report }));
                if converged {
                    BiotStatus::Ok
                } else {
                    fail(BiotStatus::NotConverged, "outer solver stopped at its iteration cap")
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `report` must be null or a handle from [`biot_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn biot_report_free(report: *mut BiotReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Outer iteration count, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_report_iterations(report: *const BiotReport) -> u32 {
    report.as_ref().map_or(0, |r| r.report.iterations as u32)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_report_converged(report: *const BiotReport) -> bool {
    report.as_ref().is_some_and(|r| r.report.converged)
}

/// True relative residual of the returned iterate, NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_report_relres(report: *const BiotReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.relres)
}

/// The benchmark CSV row; free it with [`biot_string_free`].
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_report_csv_row(report: *const BiotReport) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| {
        CString::new(r.report.csv_row()).map_or(ptr::null_mut(), CString::into_raw)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn biot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Assembles the system of a case (first backward-Euler step from rest).
///
/// # Safety
/// `handle` must be a live handle; `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn biot_system_new(handle: *const BiotCase, out: *mut *mut BiotSystemHandle) -> BiotStatus {
    guard(|| {
        let (Some(c), false) = (handle.as_ref(), out.is_null()) else {
            return fail(BiotStatus::NullPointer, "case or out is null");
        };
        let build = || -> biot_core::Result<BiotSystemHandle> {
            c.spec.validate()?;
            let (_, problem) = biot_core::bench::build_problem(c.spec.problem, c.spec.n, c.spec.params())?;
            let sys = BiotSystem::build(&problem, c.spec.tau, c.spec.variant)?;
            let rhs = sys.rhs(&problem.zero_state())?;
            Ok(BiotSystemHandle { sys, rhs })
        };
        match build() {
            Ok(h) => {
                *out = Box::into_raw(Box::new(h));
                BiotStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `sys` must be null or a handle from [`biot_system_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn biot_system_free(sys: *mut BiotSystemHandle) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of unknowns, 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biot_system_size(sys: *const BiotSystemHandle) -> usize {
    sys.as_ref().map_or(0, |s| s.sys.size())
}

/// # Safety
/// `x` must point to `len` readable and `y` to `len` writable doubles.
unsafe fn apply_checked(
    op: &dyn LinearOperator,
    x: *const f64,
    y: *mut f64,
    len: usize,
) -> BiotStatus {
    if x.is_null() || y.is_null() {
        return fail(BiotStatus::NullPointer, "vector is null");
    }
    if len != op.nrows() {
        return fail(
            BiotStatus::DimensionMismatch,
            format!("vector length {len}, operator size {}", op.nrows()),
        );
    }
    let xs = std::slice::from_raw_parts(x, len).to_vec();
    let ys = std::slice::from_raw_parts_mut(y, len);
    op.apply(&xs, ys);
    BiotStatus::Ok
}

/// `y = A x`.
///
/// # Safety
/// `sys` must be a live handle, `x` and `y` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn biot_system_apply(
    sys: *const BiotSystemHandle,
    x: *const f64,
    y: *mut f64,
    len: usize,
) -> BiotStatus {
    guard(|| match sys.as_ref() {
        None => fail(BiotStatus::NullPointer, "system is null"),
        Some(s) => apply_checked(&s.sys.op, x, y, len),
    })
}

/// Copies the right-hand side into `out`.
///
/// # Safety
/// `sys` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn biot_system_rhs(sys: *const BiotSystemHandle, out: *mut f64, len: usize) -> BiotStatus {
    guard(|| {
        let (Some(s), false) = (sys.as_ref(), out.is_null()) else {
            return fail(BiotStatus::NullPointer, "system or out is null");
        };
        if len != s.rhs.len() {
            return fail(BiotStatus::DimensionMismatch, "rhs length");
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&s.rhs);
        BiotStatus::Ok
    })
}

/// Builds the preconditioner `precond` (exact or inexact) for a system.
///
/// # Safety
/// `sys` must be a live handle, `precond` a valid NUL-terminated string and
/// `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn biot_preconditioner_new(
    sys: *const BiotSystemHandle,
    precond: *const c_char,
    inexact: bool,
    out: *mut *mut BiotPreconditioner,
) -> BiotStatus {
    guard(|| {
        let (Some(s), false) = (sys.as_ref(), out.is_null()) else {
            return fail(BiotStatus::NullPointer, "system or out is null");
        };
        let id: PrecondId = match str_arg(precond, "precond").map(str::parse) {
            Ok(Ok(p)) => p,
            Ok(Err(e)) => return from_error(e),
            Err(st) => return st,
        };
        if id.eliminated != (s.sys.variant == Variant::Eliminated) {
            return fail(BiotStatus::InvalidArgument, "preconditioner does not match the system variant");
        }
        match BlockPreconditioner::build(&s.sys, id.family, inexact) {
            Ok(prec) => {
                *out = Box::into_raw(Box::new(BiotPreconditioner { prec }));
                BiotStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `prec` must be null or a handle from [`biot_preconditioner_new`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn biot_preconditioner_free(prec: *mut BiotPreconditioner) {
    if !prec.is_null() {
        drop(Box::from_raw(prec));
    }
}

/// `z = B r`.
///
/// # Safety
/// `prec` must be a live handle, `r` and `z` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn biot_preconditioner_apply(
    prec: *const BiotPreconditioner,
    r: *const f64,
    z: *mut f64,
    len: usize,
) -> BiotStatus {
    guard(|| match prec.as_ref() {
        None => fail(BiotStatus::NullPointer, "preconditioner is null"),
        Some(p) => apply_checked(&p.prec, r, z, len),
    })
}

/// Mandel's analytic pore pressure at abscissa `x` and time `t` for the
/// default setup with Poisson ratio `nu` and permeability `k`.
///
/// # Safety
/// `out` must be a valid pointer to a writable double.
#[no_mangle]
pub unsafe extern "C" fn biot_mandel_pressure(x: f64, t: f64, nu: f64, k: f64, out: *mut f64) -> BiotStatus {
    guard(|| {
        if out.is_null() {
            return fail(BiotStatus::NullPointer, "out is null");
        }
        let cfg = MandelConfig::default().with_nu(nu).with_k(k);
        match mandel_pressure(x, t, &cfg) {
            Ok(p) => {
                *out = p;
                BiotStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
