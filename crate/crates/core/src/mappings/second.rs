use super::first::check_kg;
use super::{FamilyParams, FamilyVariant, MappingProblem, MappingSolution, ParamViolation};
use crate::error::{Error, Result};
use crate::numkit::{self, ComplexMatrix};

/// Particular solution of the second characterization, available when
/// `X^*Y + Y^*X` is positive definite.
#[derive(Debug, Clone)]
pub struct SecondCharBase {
    pub h: ComplexMatrix,
    /// `(X^*Y + Y^*X)^{-1}`.
    pub m: ComplexMatrix,
    /// Lower Cholesky factor of `M`.
    pub m1: ComplexMatrix,
    /// `Y M1 + (YX^+)^* X M1`, so that `H + H^* = B B^*`.
    pub b: ComplexMatrix,
}

/// Builds
/// `H = (YX^+ - (YX^+)^*)/2 + (YMY^* + YMX^*YX^+ + (YX^+)^*XMY^* + (YX^+)^*XMX^*YX^+)/2`.
pub fn second_char_base(p: &MappingProblem) -> Result<SecondCharBase> {
    let (residual, tol) = p.range_check();
    if residual > tol {
        return Err(Error::Infeasible(super::dissipative_exists(p)?));
    }
    let gram = p.gram();
    // Fails when the gram matrix is singular or indefinite.
    let l = numkit::cholesky_factor(&gram, &p.tol)?;
    let m = inverse_from_cholesky(&l)?;
    let m1 = numkit::cholesky_factor(&m, &p.tol)?;

    let y = &p.y;
    let x = &p.x;
    let yxd = &p.yxdag;
    let yxd_adj = yxd.adjoint();
    // W = Y + (YX^+)^* X, so the symmetric part is W M W^* / 2.
    let w = y + &yxd_adj * x;
    let h = numkit::skew_part(yxd) + numkit::hermitian_part(&(&w * &m * w.adjoint())).scale(0.5);
    let b = &w * &m1;
    Ok(SecondCharBase { h, m, m1, b })
}

fn inverse_from_cholesky(l: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = l.nrows();
    let linv = l
        .solve_lower_triangular(&ComplexMatrix::identity(n, n))
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    Ok(numkit::hermitian_part(&(linv.adjoint() * linv)))
}

/// `Δ = H + H~(K, G, Z)` with
/// `2H~ = P K P + P G P - P Z^* XX^+ + XX^+ Z P + Y M X^* Z P
///       + (YX^+)^* X M X^* Z P + P Z^* X M Y^* + P Z^* X M X^* YX^+
///       + P Z^* X M X^* Z P`, where `P = P_X`.
pub fn second_char_member(
    base: &SecondCharBase,
    p: &MappingProblem,
    params: &FamilyParams,
) -> Result<MappingSolution> {
    let mut violations = Vec::new();
    if params.variant != FamilyVariant::Second {
        violations.push(ParamViolation::WrongVariant(params.variant));
    }
    check_kg(p, params, &mut violations)?;
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    let px = &p.px;
    let pxx = p.range_projector();
    let x = &p.x;
    let z = &params.z;
    let zp = z * px;
    let pz_adj = zp.adjoint();
    // Y M X^* Z P + (YX^+)^* X M X^* Z P = W M X^* Z P.
    let w = &p.y + p.yxdag.adjoint() * x;
    let xm = x * &base.m;
    let coupling = &w * xm.adjoint() * &zp;
    let ht = px * (&params.k + &params.g) * px - &pz_adj * &pxx
        + &pxx * &zp
        + &coupling
        + coupling.adjoint()
        + &pz_adj * &xm * x.adjoint() * &zp;
    let delta = &base.h + ht.scale(0.5);
    MappingSolution::assess(delta, &p.x, &p.y, &p.tol)
}
