//! Dissipative mappings: matrices `Δ` with `ΔX = Y` and `Δ + Δ^*` positive
//! semidefinite.
//!
//! [`MappingProblem`] caches the rank-revealing factors of `X`; the
//! operations in this module and its submodules all work from those cached
//! factors.

mod first;
mod real;
mod second;
mod skew;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{
    self, ComplexMatrix, ComplexVector, SvdFactors, TolerancePolicy,
};

pub use first::{
    family_member_first, minimal_first_params, validate_first_params, FamilyParams,
    FamilyVariant, ParamViolation,
};
pub use real::{augment, real_min_norm_dissipative, realify, RealAugmented};
pub use second::{second_char_base, second_char_member, SecondCharBase};
pub use skew::{skew_exists, skew_family_member, skew_min_map};

/// An `(X, Y)` pair together with the factors of `X` every construction
/// needs.
#[derive(Debug, Clone)]
pub struct MappingProblem {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub svd: SvdFactors,
    /// `X^+`.
    pub xdag: ComplexMatrix,
    /// `P_X = I - X X^+`.
    pub px: ComplexMatrix,
    /// `Y X^+`.
    pub yxdag: ComplexMatrix,
    pub tol: TolerancePolicy,
}

impl MappingProblem {
    pub fn new(x: ComplexMatrix, y: ComplexMatrix, tol: TolerancePolicy) -> Result<Self> {
        if x.shape() != y.shape() {
            return Err(Error::Shape(format!(
                "X is {}x{} but Y is {}x{}",
                x.nrows(),
                x.ncols(),
                y.nrows(),
                y.ncols()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Shape("X and Y must be nonempty".into()));
        }
        tol.validate()?;
        numkit::ensure_finite(&x, "X")?;
        numkit::ensure_finite(&y, "Y")?;
        let svd = numkit::reduced_svd(&x, &tol)?;
        let xdag = pinv_from_factors(&svd);
        let px = &svd.u2 * svd.u2.adjoint();
        let yxdag = &y * &xdag;
        Ok(Self {
            x,
            y,
            svd,
            xdag,
            px,
            yxdag,
            tol,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    pub fn rank(&self) -> usize {
        self.svd.rank
    }

    /// `X X^+ = U1 U1^*`.
    pub fn range_projector(&self) -> ComplexMatrix {
        &self.svd.u1 * self.svd.u1.adjoint()
    }

    /// `X^* Y + Y^* X`.
    pub fn gram(&self) -> ComplexMatrix {
        numkit::hermitian_part(&(self.x.adjoint() * &self.y)).scale(2.0)
    }

    /// Singular value threshold for matrices derived from `Y X^+`, such as
    /// `U1^*(YX^+ + (YX^+)^*)U1`. Their rounding error scales with
    /// `||Y|| ||X^+||` rather than with their own norm.
    pub(crate) fn derived_rank_threshold(&self, a: &ComplexMatrix) -> Result<f64> {
        let (n, m) = self.x.shape();
        let rtol = self.tol.rank_rtol.unwrap_or((n * m).max(1) as f64 * f64::EPSILON);
        let own = numkit::singular_values(a)?.first().copied().unwrap_or(0.0);
        Ok(rtol * own.max(self.y.norm() * self.xdag.norm()))
    }

    fn range_check(&self) -> (f64, f64) {
        let residual = (&self.yxdag * &self.x - &self.y).norm();
        let tol = self.tol.residual_tol * self.y.norm().max(1.0);
        (residual, tol)
    }
}

fn pinv_from_factors(f: &SvdFactors) -> ComplexMatrix {
    let mut v = f.v1.clone();
    for (j, &s) in f.sigma1.iter().enumerate() {
        v.column_mut(j).unscale_mut(s);
    }
    v * f.u1.adjoint()
}

/// Which structured mapping a feasibility test was run for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    Dissipative,
    RealDissipative,
    SkewHermitian,
}

/// Outcome of the two existence conditions: the range condition
/// `Y X^+ X = Y`, and either `X^*Y + Y^*X ⪰ 0` (dissipative) or
/// `X^*Y` skew-Hermitian (skew-Hermitian mapping).
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub kind: MappingKind,
    pub range_residual: f64,
    pub range_tol: f64,
    pub range_ok: bool,
    /// `λ_min(X^*Y + Y^*X)` or `||X^*Y + Y^*X||_F` for the skew case.
    pub gram_measure: f64,
    pub gram_tol: f64,
    pub gram_ok: bool,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.range_ok && self.gram_ok
    }

    pub fn into_result(self) -> Result<()> {
        if self.feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible(self))
        }
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.range_ok {
            parts.push(format!(
                "Y X^+ X != Y (residual {:e} > {:e})",
                self.range_residual, self.range_tol
            ));
        }
        if !self.gram_ok {
            parts.push(match self.kind {
                MappingKind::SkewHermitian => format!(
                    "X*Y not skew-Hermitian (||X*Y + Y*X||_F = {:e} > {:e})",
                    self.gram_measure, self.gram_tol
                ),
                _ => format!(
                    "X*Y+Y*X not PSD (lambda_min {:e} < -{:e})",
                    self.gram_measure, self.gram_tol
                ),
            });
        }
        if parts.is_empty() {
            write!(f, "feasible")
        } else {
            write!(f, "{}", parts.join("; "))
        }
    }
}

/// A constructed mapping with its defining residuals.
#[derive(Debug, Clone)]
pub struct MappingSolution {
    pub delta: ComplexMatrix,
    pub frob_norm_sq: f64,
    pub feasible: bool,
    /// `||ΔX - Y||_F`.
    pub residual: f64,
    /// `λ_min(Δ + Δ^*)`.
    pub min_eig_sym: f64,
    /// Largest imaginary entry before truncation, for real mappings.
    pub imag_before_truncation: Option<f64>,
}

impl MappingSolution {
    /// Measures `delta` against `ΔX = Y` and `Δ + Δ^* ⪰ 0`.
    pub fn assess(
        delta: ComplexMatrix,
        x: &ComplexMatrix,
        y: &ComplexMatrix,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        let residual = (&delta * x - y).norm();
        let sym = numkit::hermitian_part(&delta).scale(2.0);
        let min_eig_sym = numkit::min_eigenvalue(&sym)?;
        let norm2 = numkit::spectral_norm(&delta)?;
        let feasible = residual <= tol.residual_tol * y.norm().max(1.0)
            && min_eig_sym >= -tol.psd_tol * norm2.max(1.0);
        Ok(Self {
            frob_norm_sq: numkit::frobenius_sq(&delta),
            delta,
            feasible,
            residual,
            min_eig_sym,
            imag_before_truncation: None,
        })
    }
}

/// Tests `Y X^+ X = Y` and `X^*Y + Y^*X ⪰ 0`.
pub fn dissipative_exists(p: &MappingProblem) -> Result<FeasibilityReport> {
    let (range_residual, range_tol) = p.range_check();
    let gram = p.gram();
    let gram_measure = numkit::min_eigenvalue(&gram)?;
    let gram_norm = numkit::spectral_norm(&gram)?;
    let gram_tol = p.tol.psd_tol * gram_norm.max(1.0);
    Ok(FeasibilityReport {
        kind: MappingKind::Dissipative,
        range_residual,
        range_tol,
        range_ok: range_residual <= range_tol,
        gram_measure,
        gram_tol,
        gram_ok: gram_measure >= -gram_tol,
    })
}

/// The unique minimal Frobenius-norm dissipative mapping
/// `Y X^+ - (Y X^+)^* P_X`.
pub fn min_norm_dissipative(p: &MappingProblem) -> Result<MappingSolution> {
    dissipative_exists(p)?.into_result()?;
    let delta = &p.yxdag - p.yxdag.adjoint() * &p.px;
    MappingSolution::assess(delta, &p.x, &p.y, &p.tol)
}

/// `2||YX^+||_F^2 - tr((YX^+)^* X X^+ (YX^+))`, the squared norm of the
/// minimal mapping.
pub fn min_norm_sq_formula(p: &MappingProblem) -> f64 {
    let t = p.yxdag.adjoint() * p.range_projector() * &p.yxdag;
    2.0 * numkit::frobenius_sq(&p.yxdag) - numkit::trace(&t).re
}

/// Minimal dissipative mapping for a single vector pair:
/// `y x^*/|x|^2 - x y^*/|x|^2 + (y^*x) x x^*/|x|^4`.
pub fn min_norm_dissipative_vector(
    x: &ComplexVector,
    y: &ComplexVector,
    tol: &TolerancePolicy,
) -> Result<MappingSolution> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "x has length {} but y has length {}",
            x.len(),
            y.len()
        )));
    }
    let xm = ComplexMatrix::from_column_slice(x.len(), 1, x.as_slice());
    let ym = ComplexMatrix::from_column_slice(y.len(), 1, y.as_slice());
    numkit::ensure_finite(&xm, "x")?;
    numkit::ensure_finite(&ym, "y")?;
    let nx = x.norm();
    let ny = y.norm();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::Domain("x and y must be nonzero".into()));
    }
    let xy = x.dotc(y);
    let gram_tol = tol.psd_tol * nx * ny;
    if xy.re < -gram_tol {
        return Err(Error::Infeasible(FeasibilityReport {
            kind: MappingKind::Dissipative,
            range_residual: 0.0,
            range_tol: 0.0,
            range_ok: true,
            gram_measure: 2.0 * xy.re,
            gram_tol,
            gram_ok: false,
        }));
    }
    let nx2 = nx * nx;
    let yx = xy.conj();
    let delta = (&ym * xm.adjoint() - &xm * ym.adjoint()).unscale(nx2)
        + (&xm * xm.adjoint()) * (yx / (nx2 * nx2));
    MappingSolution::assess(delta, &xm, &ym, tol)
}

/// `2|y|^2/|x|^2 - |x^*y|^2/|x|^4`.
pub fn min_norm_sq_vector_formula(x: &ComplexVector, y: &ComplexVector) -> f64 {
    let nx2 = x.norm_squared();
    2.0 * y.norm_squared() / nx2 - x.dotc(y).norm_sqr() / (nx2 * nx2)
}
