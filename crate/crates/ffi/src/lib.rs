//! C interface to the `dissipative` library.
//!
//! Matrices and systems cross the boundary as opaque handles created by
//! `ds_*_new` and released by the matching `ds_*_free`. Every fallible call
//! returns a [`DsStatus`]; on failure [`ds_last_error_message`] holds a
//! description for the calling thread. Matrix data is passed row-major as
//! separate real and imaginary arrays; a null imaginary array means zero.
//! Panics never unwind across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dissipative::dhsys::{self, DhSystem, Restriction};
use dissipative::mappings::{self, MappingProblem, MappingSolution};
use dissipative::numkit::{self, ComplexMatrix, TolerancePolicy};
use dissipative::radii::{self, MuConfig, SweepConfig};
use dissipative::Error;
use num_complex::Complex64;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    Shape = 2,
    Structure = 3,
    NotApplicable = 4,
    Infeasible = 5,
    InvalidParams = 6,
    NotFinite = 7,
    Config = 8,
    Numerical = 9,
    Panic = 10,
}

/// Radius variants accepted by [`ds_radius`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsRadiusKind {
    UnstructuredComplex = 0,
    StructuredComplex = 1,
    UnstructuredRealBounds = 2,
    StructuredReal = 3,
    SingularityDistance = 4,
}

/// Opaque complex matrix.
pub struct DsMatrix(ComplexMatrix);

/// Opaque validated DH system.
pub struct DsSystem(DhSystem);

/// Tolerances. A negative `rank_rtol` selects the size-dependent default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsTolerances {
    pub rank_rtol: f64,
    pub psd_tol: f64,
    pub residual_tol: f64,
}

/// Frequency sweep settings. A non-positive `w_max` is resolved per system.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsSweepConfig {
    pub w_max: f64,
    pub grid_points: usize,
    pub refine_iters: usize,
    pub multistarts: usize,
    pub rng_seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DsMappingResult {
    pub frob_norm_sq: f64,
    pub residual: f64,
    pub min_eig_sym: f64,
    pub feasible: bool,
}

/// Radius outcome. `lower` and `upper` are NaN when the kind has no bounds.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsRadiusResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub w_star: f64,
    pub certified: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsEtaResult {
    pub w: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub optimized_value: f64,
    pub eig_residual: f64,
    pub omega_dim: usize,
    pub equality_certified: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsMuResult {
    pub value: f64,
    pub gamma_star: f64,
    pub boundary_limit: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DsStatus {
    match e {
        Error::Shape(_) | Error::IndexOutOfRange { .. } => DsStatus::Shape,
        Error::Structure(_) | Error::NonFinite(_) | Error::NotPositiveDefinite(_) => {
            DsStatus::Structure
        }
        Error::NotApplicable(_) | Error::OnSpectrum { .. } => DsStatus::NotApplicable,
        Error::Infeasible(_) => DsStatus::Infeasible,
        Error::InvalidParams(_) => DsStatus::InvalidParams,
        Error::NotFinite(_) | Error::NoMinimum | Error::NoCandidate(_) => DsStatus::NotFinite,
        Error::Config(_) | Error::Domain(_) | Error::Io(_) | Error::Parse(_) => DsStatus::Config,
        Error::Decomposition(_) | Error::InternalConsistency(_) => DsStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> DsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            DsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            DsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn put_matrix(dst: *mut *mut DsMatrix, m: ComplexMatrix) {
    if !dst.is_null() {
        *dst = Box::into_raw(Box::new(DsMatrix(m)));
    }
}

fn tolerances(t: Option<&DsTolerances>) -> TolerancePolicy {
    match t {
        None => TolerancePolicy::default(),
        Some(t) => TolerancePolicy {
            rank_rtol: (t.rank_rtol >= 0.0).then_some(t.rank_rtol),
            psd_tol: t.psd_tol,
            residual_tol: t.residual_tol,
        },
    }
}

fn sweep(c: Option<&DsSweepConfig>) -> SweepConfig {
    match c {
        None => SweepConfig::default(),
        Some(c) => SweepConfig {
            w_max: (c.w_max > 0.0).then_some(c.w_max),
            grid_points: c.grid_points,
            refine_iters: c.refine_iters,
            multistarts: c.multistarts,
            rng_seed: c.rng_seed,
        },
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ds_tolerances_default() -> DsTolerances {
    let t = TolerancePolicy::default();
    DsTolerances {
        rank_rtol: t.rank_rtol.unwrap_or(-1.0),
        psd_tol: t.psd_tol,
        residual_tol: t.residual_tol,
    }
}

#[no_mangle]
pub extern "C" fn ds_sweep_config_default() -> DsSweepConfig {
    let s = SweepConfig::default();
    DsSweepConfig {
        w_max: s.w_max.unwrap_or(0.0),
        grid_points: s.grid_points,
        refine_iters: s.refine_iters,
        multistarts: s.multistarts,
        rng_seed: s.rng_seed,
    }
}

/// Creates a `rows x cols` matrix from row-major `re` and optional `im`.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_matrix_new(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    out_matrix: *mut *mut DsMatrix,
) -> DsStatus {
    guard(|| {
        let dst = out(out_matrix, "out_matrix")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Shape("matrix size overflows".into()))?;
        if len > 0 && re.is_null() {
            return Err(Fail::Null("re"));
        }
        let re = if len == 0 { &[][..] } else { std::slice::from_raw_parts(re, len) };
        let data: Vec<Complex64> = if im.is_null() || len == 0 {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let m = numkit::from_row_major(rows, cols, &data)?;
        *dst = Box::into_raw(Box::new(DsMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_matrix_free(m: *mut DsMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_matrix_rows(m: *const DsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nrows())
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_matrix_cols(m: *const DsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.ncols())
}

/// Copies the entries row-major into `re` and, when non-null, `im`.
///
/// # Safety
/// `re` (and `im` when non-null) must have room for `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_matrix_copy(m: *const DsMatrix, re: *mut f64, im: *mut f64) -> DsStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        let (r, c) = m.shape();
        if r * c == 0 {
            return Ok(());
        }
        if re.is_null() {
            return Err(Fail::Null("re"));
        }
        let re = std::slice::from_raw_parts_mut(re, r * c);
        let mut im = (!im.is_null()).then(|| std::slice::from_raw_parts_mut(im, r * c));
        for i in 0..r {
            for j in 0..c {
                let z = m[(i, j)];
                re[i * c + j] = z.re;
                if let Some(im) = im.as_deref_mut() {
                    im[i * c + j] = z.im;
                }
            }
        }
        Ok(())
    })
}

/// Validates `(J, R, Q)` as a DH system. `tol` may be null for defaults.
///
/// # Safety
/// Handles must be live; `out_system` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_system_new(
    j: *const DsMatrix,
    r: *const DsMatrix,
    q: *const DsMatrix,
    real: bool,
    tol: *const DsTolerances,
    out_system: *mut *mut DsSystem,
) -> DsStatus {
    guard(|| {
        let dst = out(out_system, "out_system")?;
        let sys = dhsys::validate_dh(
            deref(j, "J")?.0.clone(),
            deref(r, "R")?.0.clone(),
            deref(q, "Q")?.0.clone(),
            real,
            tolerances(tol.as_ref()),
        )?;
        *dst = Box::into_raw(Box::new(DsSystem(sys)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_system_free(s: *mut DsSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_system_dim(s: *const DsSystem) -> usize {
    s.as_ref().map_or(0, |s| s.0.n())
}

/// Minimal dissipative `Δ` with `ΔX = Y`. With `real` set, the real
/// variant is computed. `out_delta` may be null.
///
/// # Safety
/// Handles must be live; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_min_norm_dissipative(
    x: *const DsMatrix,
    y: *const DsMatrix,
    real: bool,
    tol: *const DsTolerances,
    out_result: *mut DsMappingResult,
    out_delta: *mut *mut DsMatrix,
) -> DsStatus {
    guard(|| {
        let res = out(out_result, "out_result")?;
        let x = &deref(x, "X")?.0;
        let y = &deref(y, "Y")?.0;
        let tol = tolerances(tol.as_ref());
        let sol: MappingSolution = if real {
            mappings::real_min_norm_dissipative(x, y, &tol)?
        } else {
            mappings::min_norm_dissipative(&MappingProblem::new(x.clone(), y.clone(), tol)?)?
        };
        *res = DsMappingResult {
            frob_norm_sq: sol.frob_norm_sq,
            residual: sol.residual,
            min_eig_sym: sol.min_eig_sym,
            feasible: sol.feasible,
        };
        put_matrix(out_delta, sol.delta);
        Ok(())
    })
}

/// Stability radius of `sys` under perturbations restricted by `B` and
/// `C` (`C` may be null for `B^*`). `cfg` may be null for defaults. The
/// certificate outputs may be null and are left untouched when no
/// certificate exists.
///
/// # Safety
/// Handles must be live; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_radius(
    sys: *const DsSystem,
    b: *const DsMatrix,
    c: *const DsMatrix,
    kind: DsRadiusKind,
    cfg: *const DsSweepConfig,
    out_result: *mut DsRadiusResult,
    out_delta_j: *mut *mut DsMatrix,
    out_delta_r: *mut *mut DsMatrix,
) -> DsStatus {
    guard(|| {
        let res = out(out_result, "out_result")?;
        let sys = &deref(sys, "system")?.0;
        let rst = Restriction::new(deref(b, "B")?.0.clone(), c.as_ref().map(|c| c.0.clone()));
        let cfg = sweep(cfg.as_ref());
        let rep = match kind {
            DsRadiusKind::UnstructuredComplex => radii::unstructured_radius_complex(sys, &rst, &cfg)?,
            DsRadiusKind::StructuredComplex => radii::structured_radius_complex(sys, &rst, &cfg)?,
            DsRadiusKind::UnstructuredRealBounds => {
                radii::unstructured_radius_real(sys, &rst, &cfg, &MuConfig::default())?
            }
            DsRadiusKind::StructuredReal => radii::structured_radius_real(sys, &rst, &cfg)?,
            DsRadiusKind::SingularityDistance => radii::distance_to_singularity(sys, &rst, &cfg)?,
        };
        *res = DsRadiusResult {
            value: rep.value,
            lower: rep.lower.unwrap_or(f64::NAN),
            upper: rep.upper.unwrap_or(f64::NAN),
            w_star: rep.w_star,
            certified: rep.certified,
        };
        if let Some(cert) = rep.certificate {
            put_matrix(out_delta_j, cert.delta_j);
            put_matrix(out_delta_r, cert.delta_r);
        }
        Ok(())
    })
}

/// Structured eigenvalue backward error at `iw`. Uses real perturbations
/// when the system was created as real.
///
/// # Safety
/// Handles must be live; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_eta(
    sys: *const DsSystem,
    b: *const DsMatrix,
    w: f64,
    cfg: *const DsSweepConfig,
    out_result: *mut DsEtaResult,
) -> DsStatus {
    guard(|| {
        let res = out(out_result, "out_result")?;
        let sys = &deref(sys, "system")?.0;
        let b = &deref(b, "B")?.0;
        let cfg = sweep(cfg.as_ref());
        let e = if sys.real {
            radii::eta_real(sys, b, w, &cfg)?
        } else {
            radii::eta_complex(sys, b, w, &cfg)?
        };
        *res = DsEtaResult {
            w: e.w,
            lower_bound: e.lower_bound,
            upper_bound: e.upper_bound,
            optimized_value: e.optimized_value,
            eig_residual: e.eig_residual,
            omega_dim: e.omega_dim,
            equality_certified: e.equality_certified,
        };
        Ok(())
    })
}

/// Real structured singular value `μ_R(M)` for the spectral norm.
///
/// # Safety
/// `m` must be live; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_mu_real(m: *const DsMatrix, out_result: *mut DsMuResult) -> DsStatus {
    guard(|| {
        let res = out(out_result, "out_result")?;
        let mu = radii::mu_real_2(&deref(m, "M")?.0, &MuConfig::default())?;
        *res = DsMuResult {
            value: mu.value,
            gamma_star: mu.gamma_star,
            boundary_limit: mu.boundary_limit,
        };
        Ok(())
    })
}
