//! C ABI over measures, symbols and grid operators.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`LevyStatus`]; on failure `levy_last_error` describes the cause for the
//! calling thread. Panics are caught and reported as `LEVY_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use levyops::config::measure_from_toml;
use levyops::grid::{apply_levy_direct, apply_mode_factors, fractional_laplacian, GridField};
use levyops::measure::CheckGrids;
use levyops::solver::mode_symbol;
use levyops::symbol::{eval_measure, EvaluationMode};
use levyops::{Error, Region};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMeasure = 3,
    Rejected = 4,
    AssumptionFailed = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

/// Integration region for truncated moments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevyRegion {
    /// `|y| < r`; requires `c > sigma`.
    Inside = 0,
    /// `|y| >= r`; requires `c < sigma`.
    Outside = 1,
}

/// Opaque Lévy measure.
pub struct LevyMeasure(levyops::LevyMeasure);

/// Opaque periodic grid field.
pub struct LevyField(GridField);

/// Structural checks on the default grids.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LevyAssumptions {
    pub lambda_hat: f64,
    pub nondegen_hat: f64,
    pub cancellation_max: f64,
    pub lambda_finite: bool,
    pub nondegenerate: bool,
    pub cancellation_ok: bool,
    pub passes: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LevyStatus {
    match e {
        Error::InvalidMeasure(_) => LevyStatus::InvalidMeasure,
        Error::InvalidArgument(_) | Error::NonHermitian { .. } => LevyStatus::InvalidArgument,
        Error::Rejected(_) => LevyStatus::Rejected,
        Error::AssumptionFailed(_) => LevyStatus::AssumptionFailed,
        Error::Config(_) => LevyStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Plot(_) => LevyStatus::Io,
    }
}

struct Fail(LevyStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LevyStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LevyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LevyStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            LevyStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn levy_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a measure from a TOML table such as
/// `kind = "dyadic_comb"`, `dim = 1`, `sigma = 1.0`, `k_min = -30`, `k_max = 30`.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out_measure` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_from_toml(toml: *const c_char, out_measure: *mut *mut LevyMeasure) -> LevyStatus {
    guard(|| {
        let slot = out(out_measure, "out_measure")?;
        *slot = ptr::null_mut();
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml).to_str().map_err(|e| Fail(LevyStatus::Config, e.to_string()))?;
        let m = measure_from_toml(text)?;
        *slot = Box::into_raw(Box::new(LevyMeasure(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from `levy_measure_from_toml` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_free(m: *mut LevyMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_dim(m: *const LevyMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// Order sigma, or NaN for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_order(m: *const LevyMeasure) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.0.order())
}

/// `nu({|y| >= r})`.
///
/// # Safety
/// `m` must be a live handle and `out_value` valid.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_tail_mass(m: *const LevyMeasure, r: f64, out_value: *mut f64) -> LevyStatus {
    guard(|| {
        let m = deref(m, "measure")?;
        let o = out(out_value, "out_value")?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Fail(LevyStatus::InvalidArgument, format!("radius {r} must be positive and finite")));
        }
        *o = m.0.tail_mass(r);
        Ok(())
    })
}

/// `int_region |y|^c nu(dy)` with the region split at `r`.
///
/// # Safety
/// `m` must be a live handle and `out_value` valid.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_moment(
    m: *const LevyMeasure,
    c: f64,
    r: f64,
    region: LevyRegion,
    out_value: *mut f64,
) -> LevyStatus {
    guard(|| {
        let m = deref(m, "measure")?;
        let o = out(out_value, "out_value")?;
        let region = match region {
            LevyRegion::Inside => Region::Inside,
            LevyRegion::Outside => Region::Outside,
        };
        *o = m.0.truncated_moment(c, r, region)?;
        Ok(())
    })
}

/// `N(xi)` at a frequency of length `dim`.
///
/// # Safety
/// `xi` must point to `len` doubles and `out_value` be valid.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_nondegeneracy(
    m: *const LevyMeasure,
    xi: *const f64,
    len: usize,
    out_value: *mut f64,
) -> LevyStatus {
    guard(|| {
        let m = deref(m, "measure")?;
        let xi = input(xi, len, "xi")?;
        *out(out_value, "out_value")? = m.0.nondegeneracy(xi)?;
        Ok(())
    })
}

/// First moment over the annulus `r1 <= |y| < r2`, written to `out_vec[0..dim]`.
///
/// # Safety
/// `out_vec` must point to `len >= dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_cancellation(
    m: *const LevyMeasure,
    r1: f64,
    r2: f64,
    out_vec: *mut f64,
    len: usize,
) -> LevyStatus {
    guard(|| {
        let m = deref(m, "measure")?;
        let v = m.0.cancellation_defect(r1, r2)?;
        if len < v.len() {
            return Err(Fail(LevyStatus::InvalidArgument, format!("output holds {len} values, need {}", v.len())));
        }
        if out_vec.is_null() {
            return Err(null("out_vec"));
        }
        slice::from_raw_parts_mut(out_vec, v.len()).copy_from_slice(&v);
        Ok(())
    })
}

/// Structural checks on 257 log-spaced radii and frequencies in `[2^-10, 2^10]`.
///
/// # Safety
/// `m` must be a live handle and `out_report` valid.
#[no_mangle]
pub unsafe extern "C" fn levy_measure_check_assumptions(m: *const LevyMeasure, out_report: *mut LevyAssumptions) -> LevyStatus {
    guard(|| {
        let m = deref(m, "measure")?;
        let o = out(out_report, "out_report")?;
        let r = m.0.check_assumptions(&CheckGrids::default_for(m.0.dim()))?;
        *o = LevyAssumptions {
            lambda_hat: r.lambda_hat,
            nondegen_hat: r.nondegen_hat,
            cancellation_max: r.cancellation_max,
            lambda_finite: r.lambda_finite,
            nondegenerate: r.nondegenerate,
            cancellation_ok: r.cancellation_ok,
            passes: r.passes(),
        };
        Ok(())
    })
}

/// Symbol `m(xi)` in closed form.
///
/// # Safety
/// `xi` must point to `len` doubles; `out_re` and `out_im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levy_symbol_eval(
    m: *const LevyMeasure,
    xi: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LevyStatus {
    guard(|| {
        let m = deref(m, "measure")?;
        let xi = input(xi, len, "xi")?;
        let re = out(out_re, "out_re")?;
        let im = out(out_im, "out_im")?;
        let z = eval_measure(&m.0, xi, EvaluationMode::ClosedForm, 1e-12)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Field on `[0, 2pi)^dim` with `n` nodes per axis from `n^dim` row-major values.
///
/// # Safety
/// `values` must point to `len` doubles and `out_field` be valid.
#[no_mangle]
pub unsafe extern "C" fn levy_field_new(
    dim: usize,
    n: usize,
    values: *const f64,
    len: usize,
    out_field: *mut *mut LevyField,
) -> LevyStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        *slot = ptr::null_mut();
        let v = input(values, len, "values")?;
        let f = GridField::new(dim, n, v.to_vec())?;
        *slot = Box::into_raw(Box::new(LevyField(f)));
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn levy_field_free(f: *mut LevyField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of values, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn levy_field_len(f: *const LevyField) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the values into `out_values[0..len]`; `len` must equal the field length.
///
/// # Safety
/// `out_values` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn levy_field_values(f: *const LevyField, out_values: *mut f64, len: usize) -> LevyStatus {
    guard(|| {
        let f = deref(f, "field")?;
        if len != f.0.len() {
            return Err(Fail(LevyStatus::InvalidArgument, format!("buffer holds {len} values, field has {}", f.0.len())));
        }
        if out_values.is_null() {
            return Err(null("out_values"));
        }
        slice::from_raw_parts_mut(out_values, len).copy_from_slice(f.0.values());
        Ok(())
    })
}

fn store(slot: &mut *mut LevyField, f: GridField) {
    *slot = Box::into_raw(Box::new(LevyField(f)));
}

/// `L u` through the symbol on the lattice frequencies.
///
/// # Safety
/// Handles must be live and `out_field` valid.
#[no_mangle]
pub unsafe extern "C" fn levy_apply_levy(m: *const LevyMeasure, u: *const LevyField, out_field: *mut *mut LevyField) -> LevyStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        *slot = ptr::null_mut();
        let m = deref(m, "measure")?;
        let u = deref(u, "field")?;
        if m.0.dim() != u.0.dim() {
            return Err(Fail(LevyStatus::InvalidArgument, "measure and field dimensions differ".into()));
        }
        let factors = mode_symbol(&m.0, u.0.dim(), u.0.n())?;
        store(slot, apply_mode_factors(&u.0, &factors)?);
        Ok(())
    })
}

/// `L u` by direct summation over the atoms (atomic measures only).
///
/// # Safety
/// Handles must be live and `out_field` valid.
#[no_mangle]
pub unsafe extern "C" fn levy_apply_levy_direct(
    m: *const LevyMeasure,
    u: *const LevyField,
    out_field: *mut *mut LevyField,
) -> LevyStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        *slot = ptr::null_mut();
        let m = deref(m, "measure")?;
        let u = deref(u, "field")?;
        store(slot, apply_levy_direct(&u.0, &m.0)?);
        Ok(())
    })
}

/// `(-Delta)^{sigma/2} u`, or `(1 - Delta)^{sigma/2} u` when `shifted`.
///
/// # Safety
/// `u` must be live and `out_field` valid.
#[no_mangle]
pub unsafe extern "C" fn levy_fractional_laplacian(
    u: *const LevyField,
    sigma: f64,
    shifted: bool,
    out_field: *mut *mut LevyField,
) -> LevyStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        *slot = ptr::null_mut();
        let u = deref(u, "field")?;
        store(slot, fractional_laplacian(&u.0, sigma, shifted)?);
        Ok(())
    })
}
