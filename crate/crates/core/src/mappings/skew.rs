use super::{FeasibilityReport, MappingKind, MappingProblem, MappingSolution};
use crate::error::{Error, Result};
use crate::numkit::{self, ComplexMatrix};

/// Tests whether a skew-Hermitian `Δ` with `ΔX = Y` exists: `X^*Y` must be
/// skew-Hermitian and `Y X^+ X = Y`.
pub fn skew_exists(p: &MappingProblem) -> FeasibilityReport {
    let (range_residual, range_tol) = p.range_check();
    let xy = p.x.adjoint() * &p.y;
    let gram_measure = (&xy + xy.adjoint()).norm();
    let gram_tol = p.tol.residual_tol * xy.norm().max(1.0);
    FeasibilityReport {
        kind: MappingKind::SkewHermitian,
        range_residual,
        range_tol,
        range_ok: range_residual <= range_tol,
        gram_measure,
        gram_tol,
        gram_ok: gram_measure <= gram_tol,
    }
}

/// `YX^+ - (YX^+)^* - (X^+)^* X^* Y X^+ + P_X Z P_X` for skew-Hermitian `Z`.
pub fn skew_family_member(p: &MappingProblem, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = p.n();
    if z.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "Z is {}x{}, expected {n}x{n}",
            z.nrows(),
            z.ncols()
        )));
    }
    numkit::ensure_finite(z, "Z")?;
    if !numkit::is_skew_hermitian(z) {
        return Err(Error::Structure("Z is not skew-Hermitian".into()));
    }
    skew_exists(p).into_result()?;
    let yxd = &p.yxdag;
    let delta = yxd - yxd.adjoint() - p.xdag.adjoint() * p.x.adjoint() * yxd + &p.px * z * &p.px;
    // Remove rounding drift from the skew structure.
    Ok(numkit::skew_part(&delta))
}

/// The minimal Frobenius-norm skew-Hermitian mapping (`Z = 0`).
pub fn skew_min_map(p: &MappingProblem) -> Result<MappingSolution> {
    let n = p.n();
    let delta = skew_family_member(p, &ComplexMatrix::zeros(n, n))?;
    MappingSolution::assess(delta, &p.x, &p.y, &p.tol)
}
