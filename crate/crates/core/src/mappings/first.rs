use std::fmt;

use serde::{Deserialize, Serialize};

use super::{dissipative_exists, MappingProblem, MappingSolution};
use crate::error::{Error, Result};
use crate::numkit::{self, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyVariant {
    First,
    Second,
}

/// Free parameters `(K, G, Z)` of a family of dissipative mappings.
#[derive(Debug, Clone)]
pub struct FamilyParams {
    pub k: ComplexMatrix,
    pub g: ComplexMatrix,
    pub z: ComplexMatrix,
    pub variant: FamilyVariant,
}

impl FamilyParams {
    pub fn zeros(n: usize, variant: FamilyVariant) -> Self {
        Self {
            k: ComplexMatrix::zeros(n, n),
            g: ComplexMatrix::zeros(n, n),
            z: ComplexMatrix::zeros(n, n),
            variant,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamViolation {
    Shape(String),
    WrongVariant(FamilyVariant),
    KNotHermitian,
    KNotPsd { min_eig: f64 },
    GNotSkew { residual: f64 },
    /// Kernel of the compressed `X`-block not contained in the kernel of the
    /// coupling block.
    NullInclusion { residual: f64, tol: f64 },
    /// The compressed Schur complement built from `K` is indefinite.
    SchurComplement { min_eig: f64, tol: f64 },
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape(s) => write!(f, "parameter shape: {s}"),
            Self::WrongVariant(v) => write!(f, "parameters are tagged {v:?}"),
            Self::KNotHermitian => write!(f, "K is not Hermitian"),
            Self::KNotPsd { min_eig } => {
                write!(f, "K is not positive semidefinite (lambda_min {min_eig:e})")
            }
            Self::GNotSkew { residual } => {
                write!(f, "G is not skew-Hermitian (||G + G*||_F = {residual:e})")
            }
            Self::NullInclusion { residual, tol } => write!(
                f,
                "null-space inclusion for Z fails (residual {residual:e} > {tol:e})"
            ),
            Self::SchurComplement { min_eig, tol } => write!(
                f,
                "Schur complement condition on K fails (lambda_min {min_eig:e} < -{tol:e})"
            ),
        }
    }
}

pub(super) fn check_kg(
    p: &MappingProblem,
    params: &FamilyParams,
    out: &mut Vec<ParamViolation>,
) -> Result<bool> {
    let n = p.n();
    for (name, m) in [("K", &params.k), ("G", &params.g), ("Z", &params.z)] {
        if m.shape() != (n, n) {
            out.push(ParamViolation::Shape(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    if !out.is_empty() {
        return Ok(false);
    }
    numkit::ensure_finite(&params.k, "K")?;
    numkit::ensure_finite(&params.g, "G")?;
    numkit::ensure_finite(&params.z, "Z")?;
    if !numkit::is_hermitian(&params.k) {
        out.push(ParamViolation::KNotHermitian);
    } else if !numkit::is_psd(&params.k, &p.tol)? {
        out.push(ParamViolation::KNotPsd {
            min_eig: numkit::min_eigenvalue(&params.k)?,
        });
    }
    if !numkit::is_skew_hermitian(&params.g) {
        out.push(ParamViolation::GNotSkew {
            residual: (&params.g + params.g.adjoint()).norm(),
        });
    }
    Ok(true)
}

/// Checks `(K, G, Z)` against the constraints of the first
/// characterization. With `N1 = U1^*(YX^+ + (YX^+)^*)U1` and
/// `N2 = U2^*(2YX^+ + Z^*)U1`, the coupling block must satisfy
/// `N2 (I - N1^+ N1) = 0` and `U2^*K U2 - N2 N1^+ N2^* / 2 ⪰ 0`.
pub fn validate_first_params(
    p: &MappingProblem,
    params: &FamilyParams,
) -> Result<Vec<ParamViolation>> {
    let mut out = Vec::new();
    if params.variant != FamilyVariant::First {
        out.push(ParamViolation::WrongVariant(params.variant));
    }
    if !check_kg(p, params, &mut out)? {
        return Ok(out);
    }
    let u1 = &p.svd.u1;
    let u2 = &p.svd.u2;
    if u2.ncols() == 0 {
        return Ok(out);
    }
    let yxd = &p.yxdag;
    let n1 = numkit::hermitian_part(&(u1.adjoint() * yxd * u1)).scale(2.0);
    let n2 = u2.adjoint() * (yxd.scale(2.0) + params.z.adjoint()) * u1;
    let n1_pinv = numkit::pseudoinverse_above(&n1, p.derived_rank_threshold(&n1)?)?;

    let p1 = ComplexMatrix::identity(n1.nrows(), n1.nrows()) - &n1_pinv * &n1;
    let residual = (&n2 * p1).norm();
    let tol = p.tol.residual_tol * n2.norm().max(1.0);
    if residual > tol {
        out.push(ParamViolation::NullInclusion { residual, tol });
    }

    let kk = numkit::hermitian_part(&(u2.adjoint() * &params.k * u2));
    let schur = numkit::hermitian_part(&(&n2 * &n1_pinv * n2.adjoint())).scale(0.5);
    let min_eig = numkit::min_eigenvalue(&(&kk - &schur))?;
    let scale = numkit::spectral_norm(&kk)?
        .max(numkit::spectral_norm(&schur)?)
        .max(1.0);
    let tol = p.tol.psd_tol * scale;
    if min_eig < -tol {
        out.push(ParamViolation::SchurComplement { min_eig, tol });
    }
    Ok(out)
}

/// Parameters reproducing the minimal-norm mapping:
/// `K = 0`, `G = 0`, `Z = -2 U1 U1^* (YX^+)^* U2 U2^*`.
pub fn minimal_first_params(p: &MappingProblem) -> FamilyParams {
    let n = p.n();
    let z = (p.range_projector() * p.yxdag.adjoint() * &p.px).scale(-2.0);
    FamilyParams {
        k: ComplexMatrix::zeros(n, n),
        g: ComplexMatrix::zeros(n, n),
        z,
        variant: FamilyVariant::First,
    }
}

/// `Δ = YX^+ + (YX^+)^* P_X + X X^+ Z P_X + P_X K P_X + P_X G P_X`.
pub fn family_member_first(p: &MappingProblem, params: &FamilyParams) -> Result<MappingSolution> {
    let violations = validate_first_params(p, params)?;
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    dissipative_exists(p)?.into_result()?;
    let px = &p.px;
    let delta = &p.yxdag
        + p.yxdag.adjoint() * px
        + p.range_projector() * &params.z * px
        + px * (&params.k + &params.g) * px;
    MappingSolution::assess(delta, &p.x, &p.y, &p.tol)
}
