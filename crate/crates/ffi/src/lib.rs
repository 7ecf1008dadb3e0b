//! C ABI over `shift-index-core`.
//!
//! Operators are opaque handles created by `si_operator_from_json` or
//! `si_operator_from_file` and released with `si_operator_free`. Every
//! fallible function returns an [`SiStatus`]; on failure the message is
//! available through `si_last_error` until the next call on the same thread.
//! Strings returned by the library are freed with `si_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use shift_index::cli::{run, RunConfig};
use shift_index::discretize::{
    assemble_cylinder_product, assemble_on_torus, numerical_index, IndexOptions, IndexReport, IndexStatus,
};
use shift_index::ellipticity::{check_elliptic, CosphereGrid, Verdict, DEFAULT_N_SCHEDULE, DEFAULT_TOL};
use shift_index::{Error, ShiftOperatorSpec};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Schema = 4,
    Domain = 5,
    DimensionCap = 6,
    NotInvertible = 7,
    Io = 8,
    Numerical = 9,
    Panic = 10,
}

/// An operator with shifts.
pub struct SiOperator {
    spec: ShiftOperatorSpec,
}

/// Kernel and cokernel dimensions with the spectral gap of the finest level.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SiIndex {
    pub ker: usize,
    pub coker: usize,
    pub index: i64,
    pub gap: f64,
    /// 1 when both truncation levels agree and show a trusted gap.
    pub converged: i32,
}

/// Outcome of the ellipticity certificate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SiEllipticity {
    /// 1 elliptic, 0 not elliptic, -1 inconclusive.
    pub verdict: i32,
    pub min_sv: f64,
    pub scale: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SiStatus {
    match e {
        Error::Parse(_) => SiStatus::Parse,
        Error::Schema(_) | Error::SizeMismatch(_) | Error::InvalidWindow { .. } | Error::TruncationTooSmall(_) => {
            SiStatus::Schema
        }
        Error::Domain(_) | Error::UnsupportedDimension { .. } | Error::InsufficientRange(_) => SiStatus::Domain,
        Error::DimensionCap { .. } => SiStatus::DimensionCap,
        Error::NonInvertible { .. } | Error::TraceClass { .. } => SiStatus::NotInvertible,
        Error::Io(_) => SiStatus::Io,
        Error::Inconclusive(_) | Error::Linalg(_) => SiStatus::Numerical,
    }
}

struct Failure(SiStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SiStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SiStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SiStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(SiStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn op_arg<'a>(op: *const SiOperator) -> Result<&'a SiOperator, Failure> {
    op.as_ref().ok_or_else(|| Failure(SiStatus::NullPointer, "operator handle is NULL".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(SiStatus::NullPointer, format!("{what} is NULL")))
}

fn index_out(r: &IndexReport) -> SiIndex {
    SiIndex {
        ker: r.ker,
        coker: r.coker,
        index: r.index,
        gap: r.gap,
        converged: i32::from(r.status == IndexStatus::Conclusive),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn si_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn si_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON spec into a new handle stored in `*out`.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn si_operator_from_json(json: *const c_char, out: *mut *mut SiOperator) -> SiStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let spec = ShiftOperatorSpec::from_json_str(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(SiOperator { spec }));
        Ok(())
    })
}

/// Reads a JSON or TOML spec file into a new handle stored in `*out`.
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn si_operator_from_file(path: *const c_char, out: *mut *mut SiOperator) -> SiStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let spec = ShiftOperatorSpec::from_path(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(SiOperator { spec }));
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `op` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn si_operator_free(op: *mut SiOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Torus dimension `d` of the operator.
///
/// # Safety
/// `op` must be a live handle or NULL; `out` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn si_operator_dimension(op: *const SiOperator, out: *mut usize) -> SiStatus {
    guard(|| {
        *out_arg(out, "out")? = op_arg(op)?.spec.d();
        Ok(())
    })
}

/// Fredholm index of `D` on the torus from Fourier truncations `K/2` and `K`.
///
/// # Safety
/// `op` must be a live handle or NULL; `out` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn si_index(op: *const SiOperator, k: usize, out: *mut SiIndex) -> SiStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = &op_arg(op)?.spec;
        let levels = [k.div_ceil(2), k].iter().map(|&kk| assemble_on_torus(spec, kk, 0.0)).collect::<Result<Vec<_>, _>>()?;
        *out = index_out(&numerical_index(&levels, &IndexOptions::default())?);
        Ok(())
    })
}

/// Fredholm index of the cylinder operator `B_ε` from truncations `(3K/4, 3H/4)` and `(K, H)`.
///
/// # Safety
/// `op` must be a live handle or NULL; `out` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn si_cylinder_index(
    op: *const SiOperator,
    k: usize,
    h: usize,
    eps: f64,
    out: *mut SiIndex,
) -> SiStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = &op_arg(op)?.spec;
        let opts = IndexOptions::default();
        let coarse = |v: usize| (3 * v).div_ceil(4);
        let levels = [(coarse(k), coarse(h)), (k, h)]
            .iter()
            .map(|&(kk, hh)| assemble_cylinder_product(spec, kk, hh, eps, 0.0, opts.cap))
            .collect::<Result<Vec<_>, _>>()?;
        *out = index_out(&numerical_index(&levels, &opts)?);
        Ok(())
    })
}

/// Ellipticity certificate on a uniform cosphere grid of resolution `grid`.
///
/// # Safety
/// `op` must be a live handle or NULL; `out` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn si_check_elliptic(op: *const SiOperator, grid: usize, out: *mut SiEllipticity) -> SiStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = &op_arg(op)?.spec;
        let r = check_elliptic(spec, &CosphereGrid::uniform(grid)?, &DEFAULT_N_SCHEDULE, DEFAULT_TOL)?;
        *out = SiEllipticity {
            verdict: match r.status {
                Verdict::Elliptic => 1,
                Verdict::NotElliptic => 0,
                Verdict::Inconclusive => -1,
            },
            min_sv: r.min_sv,
            scale: r.scale,
        };
        Ok(())
    })
}

/// Runs a JSON run configuration. The report is stored in `*report`
/// (free with `si_string_free`) and the process-style exit code in `*exit_code`.
///
/// # Safety
/// `config_json` must be NULL or a NUL-terminated string; the out pointers must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn si_run_json(config_json: *const c_char, report: *mut *mut c_char, exit_code: *mut i32) -> SiStatus {
    guard(|| {
        let report = out_arg(report, "report")?;
        let exit_code = out_arg(exit_code, "exit_code")?;
        *report = ptr::null_mut();
        let cfg = RunConfig::from_json_str(str_arg(config_json, "config_json")?)?;
        let (r, code) = run(&cfg)?;
        *report = CString::new(r.to_json()).map_err(|e| Failure(SiStatus::Numerical, e.to_string()))?.into_raw();
        *exit_code = code;
        Ok(())
    })
}

/// Frees a string returned by the library; NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn si_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
