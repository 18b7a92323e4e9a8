use super::{dissipative_exists, min_norm_dissipative, MappingKind, MappingProblem, MappingSolution};
use crate::error::{Error, Result};
use crate::numkit::{self, ComplexMatrix, TolerancePolicy};

/// Largest imaginary part, relative to `||Δ||_F`, accepted before a mapping
/// built from the augmented pair is declared real.
pub const REAL_IMAG_RTOL: f64 = 1e-10;

/// The augmented pair `([X conj(X)], [Y conj(Y)])`: real mappings from `X`
/// to `Y` are exactly the real mappings from `𝒳` to `𝒴`, and mappings
/// built from `𝒳, 𝒴` by the complex formulas come out real.
#[derive(Debug, Clone)]
pub struct RealAugmented {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub problem: MappingProblem,
}

pub fn augment(x: &ComplexMatrix, y: &ComplexMatrix, tol: TolerancePolicy) -> Result<RealAugmented> {
    if x.shape() != y.shape() {
        return Err(Error::Shape(format!(
            "X is {}x{} but Y is {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    let problem = MappingProblem::new(numkit::augment_conj(x), numkit::augment_conj(y), tol)?;
    Ok(RealAugmented {
        x: x.clone(),
        y: y.clone(),
        problem,
    })
}

/// Checks that a mapping built from an augmented pair is real, zeroes its
/// imaginary part and re-measures it against the original `X, Y`.
pub fn realify(aug: &RealAugmented, sol: MappingSolution) -> Result<MappingSolution> {
    let imag = numkit::max_imag(&sol.delta);
    let scale = sol.delta.norm();
    if imag > REAL_IMAG_RTOL * scale {
        return Err(Error::InternalConsistency(format!(
            "mapping from the augmented pair has imaginary part {imag:e} (norm {scale:e})"
        )));
    }
    let delta = sol.delta.map(|z| numkit::c64(z.re, 0.0));
    let mut out = MappingSolution::assess(delta, &aug.x, &aug.y, &aug.problem.tol)?;
    out.imag_before_truncation = Some(imag);
    Ok(out)
}

/// Minimal Frobenius-norm real dissipative mapping
/// `𝒴𝒳^+ - (𝒴𝒳^+)^* P_𝒳` taking `X` to `Y`.
pub fn real_min_norm_dissipative(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<MappingSolution> {
    let aug = augment(x, y, *tol)?;
    let mut report = dissipative_exists(&aug.problem)?;
    report.kind = MappingKind::RealDissipative;
    report.into_result()?;
    let sol = min_norm_dissipative(&aug.problem)?;
    realify(&aug, sol)
}
