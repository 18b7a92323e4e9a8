//! Stability radii and structured eigenvalue backward errors of DH systems
//! under simultaneous perturbation of `J` and `R` through restriction
//! matrices `B`, `C`.
//!
//! The infima over frequencies and over `Ω` are computed numerically: a
//! frequency sweep with golden-section refinement, and a seeded multistart
//! simplex search on the unit sphere. Optimized values are therefore upper
//! bounds on the corresponding infima; the `σ_min` bounds are exact per
//! frequency.

mod complex;
mod mu;
mod neldermead;
mod real;
mod sweep;

use serde::Serialize;

use crate::dhsys::{self, DhSystem, Restriction, StabilityClass};
use crate::error::{Error, Result};
use crate::numkit::{self, c64, ComplexMatrix, ComplexVector};

pub use complex::eigen_residual;
pub use mu::{gamma_sigma2, mu_real_2, mu_real_f_bounds, MuConfig, MuEval};
pub use neldermead::{nelder_mead, NmOptions};
pub use real::REAL_PAIR_RANK_RTOL;
pub use sweep::{frequency_minimize, rng_for, SweepConfig, SweepOutcome};

/// Largest eigen-residual accepted for an emitted certificate.
pub const CERTIFICATE_RESIDUAL_TOL: f64 = 1e-6;

/// `μ` values below this multiple of `max(1, ||M||)` are treated as zero.
pub const MU_ZERO_RTOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct EtaResult {
    pub w: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub optimized_value: f64,
    pub x_hat: ComplexVector,
    pub delta_j: ComplexMatrix,
    pub delta_r: ComplexMatrix,
    pub equality_certified: bool,
    pub eig_residual: f64,
    pub omega_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    UnstructuredComplex,
    StructuredComplex,
    UnstructuredRealBounds,
    StructuredReal,
    SingularityDistance,
}

/// How `value` should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueLabel {
    Value,
    LowerBound,
    Bounds,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub delta_j: ComplexMatrix,
    pub delta_r: ComplexMatrix,
    pub eig_vector: ComplexVector,
    pub eig_residual: f64,
    /// `sqrt(||Δ_J||_F^2 + ||Δ_R||_F^2)`.
    pub norm: f64,
}

impl Certificate {
    fn new(
        delta_j: ComplexMatrix,
        delta_r: ComplexMatrix,
        eig_vector: ComplexVector,
        eig_residual: f64,
    ) -> Option<Self> {
        if !(eig_residual <= CERTIFICATE_RESIDUAL_TOL) {
            return None;
        }
        let norm = (numkit::frobenius_sq(&delta_j) + numkit::frobenius_sq(&delta_r)).sqrt();
        Some(Self {
            delta_j,
            delta_r,
            eig_vector,
            eig_residual,
            norm,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RadiusReport {
    pub kind: RadiusKind,
    pub label: ValueLabel,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub w_star: f64,
    pub certificate: Option<Certificate>,
    pub certified: bool,
    /// Sweep settings with `w_max` resolved.
    pub sweep: SweepConfig,
    pub skipped_frequencies: Vec<f64>,
    /// Modelling readings the result depends on.
    pub assumptions: Vec<&'static str>,
}

/// Assumption tag: `Ω` is read as a nontrivial subspace.
pub const ASSUME_OMEGA_NONTRIVIAL: &str = "omega_nontrivial_subspace";
/// Assumption tag: the real side condition is taken literally, with `x^*`
/// on the left and `x^T` inside the modulus.
pub const ASSUME_SIDE_CONDITION_LITERAL: &str = "real_side_condition_literal";

/// Resolves `w_max` to `2 ||(J - R) Q||_2 + 1` when unset.
pub fn resolve_sweep(sys: &DhSystem, cfg: &SweepConfig) -> Result<SweepConfig> {
    cfg.validate()?;
    let mut out = *cfg;
    if out.w_max.is_none() {
        out.w_max = Some(2.0 * numkit::spectral_norm(&sys.a)? + 1.0);
    }
    Ok(out)
}

fn require_stable(sys: &DhSystem) -> Result<()> {
    match dhsys::stability_class(sys)? {
        StabilityClass::AsymptoticallyStable => Ok(()),
        StabilityClass::MarginallyStable => Err(Error::NotApplicable(
            "system is only marginally stable; the radius is zero".into(),
        )),
    }
}

fn require_structured(sys: &DhSystem, rst: &Restriction) -> Result<()> {
    rst.check_shapes(sys.n())?;
    if !rst.c_is_b_adjoint() {
        return Err(Error::Config(
            "structured perturbations require C = B^*".into(),
        ));
    }
    rst.require_full_column_rank(&sys.tol)
}

fn require_real(sys: &DhSystem, rst: &Restriction) -> Result<()> {
    if !sys.real || !rst.is_real() {
        return Err(Error::Structure(
            "real radii need a real system and real restriction matrices".into(),
        ));
    }
    Ok(())
}

fn no_minimum_to_not_finite(e: Error, what: &str) -> Error {
    match e {
        Error::NoMinimum => Error::NotFinite(format!("{what} is infinite on the whole sweep")),
        other => other,
    }
}

/// `r_C(J, R; B, C) = (1/√2) inf_w 1/||G(w)||_2`, with a rank-one
/// certificate built from the top singular pair of `G(w*)`.
pub fn unstructured_radius_complex(
    sys: &DhSystem,
    rst: &Restriction,
    cfg: &SweepConfig,
) -> Result<RadiusReport> {
    rst.check_shapes(sys.n())?;
    require_stable(sys)?;
    let cfg = resolve_sweep(sys, cfg)?;
    let out = frequency_minimize(
        |w, _| {
            let g = dhsys::transfer_g(sys, rst, w).ok()?;
            let s = numkit::spectral_norm(&g).ok()?;
            Some(if s > 0.0 { 1.0 / s } else { f64::INFINITY })
        },
        &cfg,
    )
    .map_err(|e| no_minimum_to_not_finite(e, "1/||G(w)||"))?;

    let w = out.w_star;
    let g = dhsys::transfer_g(sys, rst, w)?;
    let (s1, u1, v1) = numkit::top_singular_pair(&g)?;
    let delta = (&v1 * u1.adjoint()).unscale(s1);
    let delta_j = delta.scale(0.5);
    let delta_r = delta.scale(-0.5);
    let m = dhsys::resolvent_matrix(sys, w)?;
    let bv = &rst.b * &v1;
    let z = numkit::solve(&m, &ComplexMatrix::from_column_slice(bv.len(), 1, bv.as_slice()))?;
    let z = z.column(0).into_owned();
    let c = rst.c_or_adjoint();
    let res = &sys.a * &z + &rst.b * (&delta * (&c * (&sys.q * &z))) - &z * c64(0.0, w);
    let eig_residual = res.norm() / z.norm();
    let certificate = Certificate::new(delta_j, delta_r, z, eig_residual);
    Ok(RadiusReport {
        kind: RadiusKind::UnstructuredComplex,
        label: ValueLabel::Value,
        value: out.value * std::f64::consts::FRAC_1_SQRT_2,
        lower: None,
        upper: None,
        w_star: w,
        certified: certificate.is_some(),
        certificate,
        sweep: cfg,
        skipped_frequencies: out.skipped,
        assumptions: Vec::new(),
    })
}

/// Structured eigenvalue backward error at `iw` for complex perturbations.
pub fn eta_complex(
    sys: &DhSystem,
    b: &ComplexMatrix,
    w: f64,
    cfg: &SweepConfig,
) -> Result<EtaResult> {
    cfg.validate()?;
    let rst = Restriction::new(b.clone(), None);
    require_structured(sys, &rst)?;
    let bpinv = numkit::pseudoinverse_with(b, &sys.tol)?;
    complex::eta_complex_at(sys, b, &bpinv, w, cfg, 0)
}

/// Structured eigenvalue backward error at `iw` for real perturbations of a
/// real system.
pub fn eta_real(sys: &DhSystem, b: &ComplexMatrix, w: f64, cfg: &SweepConfig) -> Result<EtaResult> {
    cfg.validate()?;
    let rst = Restriction::new(b.clone(), None);
    require_real(sys, &rst)?;
    require_structured(sys, &rst)?;
    let bpinv = numkit::pseudoinverse_with(b, &sys.tol)?;
    real::eta_real_at(sys, b, &bpinv, w, cfg, 0)
}

type EtaFn = fn(&DhSystem, &ComplexMatrix, &ComplexMatrix, f64, &SweepConfig, usize) -> Result<EtaResult>;

fn sweep_eta(
    sys: &DhSystem,
    b: &ComplexMatrix,
    cfg: &SweepConfig,
    eta: EtaFn,
) -> Result<(SweepOutcome, EtaResult)> {
    let bpinv = numkit::pseudoinverse_with(b, &sys.tol)?;
    let out = frequency_minimize(
        |w, idx| match eta(sys, b, &bpinv, w, cfg, idx) {
            Ok(r) => Some(r.optimized_value),
            Err(Error::NoCandidate(_) | Error::Infeasible(_)) => Some(f64::INFINITY),
            Err(_) => None,
        },
        cfg,
    )
    .map_err(|e| no_minimum_to_not_finite(e, "the structured backward error"))?;
    let best = eta(sys, b, &bpinv, out.w_star, cfg, out.eval_index)?;
    Ok((out, best))
}

fn structured_report(
    kind: RadiusKind,
    cfg: SweepConfig,
    out: SweepOutcome,
    eta: EtaResult,
    assumptions: Vec<&'static str>,
) -> RadiusReport {
    let certificate = Certificate::new(eta.delta_j, eta.delta_r, eta.x_hat, eta.eig_residual);
    let certified = eta.equality_certified;
    RadiusReport {
        kind,
        label: if certified {
            ValueLabel::Value
        } else {
            ValueLabel::LowerBound
        },
        value: eta.optimized_value,
        lower: Some(eta.lower_bound),
        upper: Some(eta.upper_bound),
        w_star: out.w_star,
        certificate,
        certified,
        sweep: cfg,
        skipped_frequencies: out.skipped,
        assumptions,
    }
}

/// `inf_w η(J, R; B, iw)` for complex structured perturbations.
pub fn structured_radius_complex(
    sys: &DhSystem,
    rst: &Restriction,
    cfg: &SweepConfig,
) -> Result<RadiusReport> {
    require_structured(sys, rst)?;
    require_stable(sys)?;
    let cfg = resolve_sweep(sys, cfg)?;
    let (out, eta) = sweep_eta(sys, &rst.b, &cfg, complex::eta_complex_at)?;
    Ok(structured_report(
        RadiusKind::StructuredComplex,
        cfg,
        out,
        eta,
        vec![ASSUME_OMEGA_NONTRIVIAL],
    ))
}

/// `inf_w η_R(J, R; B, iw)` for real structured perturbations.
pub fn structured_radius_real(
    sys: &DhSystem,
    rst: &Restriction,
    cfg: &SweepConfig,
) -> Result<RadiusReport> {
    require_real(sys, rst)?;
    require_structured(sys, rst)?;
    require_stable(sys)?;
    let cfg = resolve_sweep(sys, cfg)?;
    let (out, eta) = sweep_eta(sys, &rst.b, &cfg, real::eta_real_at)?;
    Ok(structured_report(
        RadiusKind::StructuredReal,
        cfg,
        out,
        eta,
        vec![ASSUME_OMEGA_NONTRIVIAL, ASSUME_SIDE_CONDITION_LITERAL],
    ))
}

/// Structured distance to singularity, `η(J, R; B, 0)`.
pub fn distance_to_singularity(
    sys: &DhSystem,
    rst: &Restriction,
    cfg: &SweepConfig,
) -> Result<RadiusReport> {
    require_structured(sys, rst)?;
    cfg.validate()?;
    let out = SweepOutcome {
        w_star: 0.0,
        value: 0.0,
        eval_index: 0,
        skipped: Vec::new(),
    };
    match dhsys::resolvent_matrix(sys, 0.0) {
        Err(Error::OnSpectrum { .. }) => {
            return Ok(RadiusReport {
                kind: RadiusKind::SingularityDistance,
                label: ValueLabel::Value,
                value: 0.0,
                lower: Some(0.0),
                upper: Some(0.0),
                w_star: 0.0,
                certificate: None,
                certified: true,
                sweep: *cfg,
                skipped_frequencies: Vec::new(),
                assumptions: Vec::new(),
            })
        }
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    let bpinv = numkit::pseudoinverse_with(&rst.b, &sys.tol)?;
    let eta = complex::eta_complex_at(sys, &rst.b, &bpinv, 0.0, cfg, 0)?;
    Ok(structured_report(
        RadiusKind::SingularityDistance,
        *cfg,
        out,
        eta,
        vec![ASSUME_OMEGA_NONTRIVIAL],
    ))
}

/// Bounds `(1/√2, 1) · inf_w 1/μ_{R,2}(G(w))` on the real unstructured
/// radius.
pub fn unstructured_radius_real(
    sys: &DhSystem,
    rst: &Restriction,
    cfg: &SweepConfig,
    mu_cfg: &MuConfig,
) -> Result<RadiusReport> {
    rst.check_shapes(sys.n())?;
    require_real(sys, rst)?;
    require_stable(sys)?;
    let cfg = resolve_sweep(sys, cfg)?;
    let out = frequency_minimize(
        |w, _| {
            let g = dhsys::transfer_g(sys, rst, w).ok()?;
            let mu = mu_real_2(&g, mu_cfg).ok()?.value;
            let scale = g.norm().max(1.0);
            Some(if mu > MU_ZERO_RTOL * scale {
                1.0 / mu
            } else {
                f64::INFINITY
            })
        },
        &cfg,
    )
    .map_err(|e| no_minimum_to_not_finite(e, "1/mu(G(w))"))?;
    Ok(RadiusReport {
        kind: RadiusKind::UnstructuredRealBounds,
        label: ValueLabel::Bounds,
        value: out.value,
        lower: Some(out.value * std::f64::consts::FRAC_1_SQRT_2),
        upper: Some(out.value),
        w_star: out.w_star,
        certificate: None,
        certified: false,
        sweep: cfg,
        skipped_frequencies: out.skipped,
        assumptions: Vec::new(),
    })
}
