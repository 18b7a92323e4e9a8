//! Structured eigenvalue backward error for real perturbations of real
//! systems.
//!
//! For `x ∈ Ω` set `a = B^T Q x` and `b = B^+ (iwI - A) x`. A real
//! dissipative `Δ` with `Δ a = b` exists iff `𝒳 = [a conj(a)]`,
//! `𝒴 = [b conj(b)]` satisfy `𝒴𝒳^+𝒳 = 𝒴` and `𝒳^*𝒴 + 𝒴^*𝒳 ⪰ 0`. The
//! latter reduces to `Re(a^* b) >= |a^T b|`, i.e.
//! `x^* QRQ x >= |x^T (iwQ + QRQ) x|`.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::complex::{
    eigen_residual, from_real_coords, nm_options, random_start, to_real_coords, EtaSetup,
};
use super::neldermead::nelder_mead;
use super::sweep::{rng_for, SweepConfig};
use super::EtaResult;
use crate::dhsys::DhSystem;
use crate::error::{Error, Result};
use crate::mappings::real_min_norm_dissipative;
use crate::numkit::{self, c64, ComplexMatrix, ComplexVector, TolerancePolicy};

/// Relative singular value threshold for the rank of `[a conj(a)]`. Nearly
/// real `a` would otherwise produce a pseudoinverse dominated by rounding.
pub const REAL_PAIR_RANK_RTOL: f64 = 1e-7;

type M2 = Matrix2<Complex64>;

/// Penalty added to candidates violating the existence conditions.
const PENALTY: f64 = 1e12;

/// Squared norm of the minimal real dissipative map taking `a` to `b`, or
/// the size of the violated existence condition.
pub(crate) fn real_pair_norm_sq(
    a: &[Complex64],
    b: &[Complex64],
    tol: &TolerancePolicy,
) -> std::result::Result<f64, f64> {
    let dotc = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
    };
    let dotu = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(x, y)| x * y).sum()
    };
    let na = dotc(a, a).re;
    let nb = dotc(b, b).re;
    let sa = dotu(a, a);
    let sb = dotu(b, b);
    let p = dotc(a, b);
    let t = dotu(a, b);

    // 𝒳^*𝒴 + 𝒴^*𝒳 = 2 [[Re p, conj t], [t, Re p]].
    let gram_min = 2.0 * (p.re - t.norm());
    let gram_norm = 2.0 * (p.re.abs() + t.norm());
    if gram_min < -tol.psd_tol * gram_norm.max(1.0) {
        return Err(-gram_min / gram_norm.max(f64::MIN_POSITIVE));
    }

    let gx = M2::new(c64(na, 0.0), sa.conj(), sa, c64(na, 0.0));
    let gy = M2::new(c64(nb, 0.0), sb.conj(), sb, c64(nb, 0.0));
    let cxy = M2::new(p, t.conj(), t, p.conj());
    let (lmax, lmin) = (na + sa.norm(), na - sa.norm());
    if !(lmax > 0.0) {
        return if nb == 0.0 { Ok(0.0) } else { Err(1.0) };
    }
    let gx_pinv = if lmin > REAL_PAIR_RANK_RTOL * REAL_PAIR_RANK_RTOL * lmax {
        let det = na * na - sa.norm_sqr();
        M2::new(c64(na, 0.0), -sa.conj(), -sa, c64(na, 0.0)).unscale(det)
    } else {
        // Rank one. The range condition asks 𝒴 to vanish on the null vector
        // (1, -s/|s|)/√2 of 𝒳, with s = a^T a.
        let phase = if sa.norm() > 0.0 { sa / sa.norm() } else { c64(1.0, 0.0) };
        let miss: f64 = b
            .iter()
            .map(|bi| (bi - phase * bi.conj()).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / std::f64::consts::SQRT_2;
        let scale = (2.0 * nb).sqrt();
        if miss > tol.residual_tol * scale.max(1.0) {
            return Err(miss / scale.max(f64::MIN_POSITIVE));
        }
        gx.unscale(lmax * lmax)
    };
    let term1 = (gx_pinv * gy * gx_pinv * gx).trace().re;
    let term2 = (gx_pinv * cxy.adjoint() * gx_pinv * cxy * gx_pinv * gx).trace().re;
    Ok(2.0 * term1 - term2)
}

struct RealQuotient {
    k: usize,
    rows: usize,
    xq: Vec<Complex64>,
    t: Vec<Complex64>,
    tol: TolerancePolicy,
    penalty_scale: f64,
}

impl RealQuotient {
    fn eval(&self, v: &[f64], a: &mut [Complex64], b: &mut [Complex64]) -> f64 {
        let k = self.k;
        let nrm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return f64::INFINITY;
        }
        for r in 0..self.rows {
            let mut sa = c64(0.0, 0.0);
            let mut sb = c64(0.0, 0.0);
            for j in 0..k {
                let yj = c64(v[j], v[k + j]) / nrm;
                sa += self.xq[j * self.rows + r] * yj;
                sb += self.t[j * self.rows + r] * yj;
            }
            a[r] = sa;
            b[r] = sb;
        }
        match real_pair_norm_sq(a, b, &self.tol) {
            Ok(v) => v,
            Err(viol) => self.penalty_scale * (1.0 + viol),
        }
    }
}

/// Starting point from the real part of `x = P y` after the phase rotation
/// that maximizes it, mapped back to `Ω`.
fn real_part_start(setup: &EtaSetup, y: &ComplexVector) -> Vec<f64> {
    let x = &setup.p * y;
    let s: Complex64 = x.iter().map(|z| z * z).sum();
    let rot = Complex64::from_polar(1.0, -0.5 * s.arg());
    let xr = x.map(|z| c64((z * rot).re, 0.0));
    let alpha = setup.omega.u.adjoint() * xr;
    let y0 = setup.omega.w_chol.adjoint() * alpha;
    to_real_coords(&y0)
}

pub(crate) fn eta_real_at(
    sys: &DhSystem,
    b: &ComplexMatrix,
    bpinv: &ComplexMatrix,
    w: f64,
    cfg: &SweepConfig,
    index: usize,
) -> Result<EtaResult> {
    let setup = EtaSetup::new(sys, b, bpinv, w)?;
    let k = setup.k();
    let (sigma_min, v_min) = setup.sigma_min()?;
    let quotient = RealQuotient {
        k,
        rows: setup.t.nrows(),
        xq: setup.xq.as_slice().to_vec(),
        t: setup.t.as_slice().to_vec(),
        tol: sys.tol,
        penalty_scale: PENALTY * (1.0 + 2.0 * sigma_min * sigma_min),
    };
    let rows = quotient.rows;
    let mut sa = vec![c64(0.0, 0.0); rows];
    let mut sb = vec![c64(0.0, 0.0); rows];
    let opts = nm_options(k);

    let mut best: Option<(Vec<f64>, f64)> = None;
    let starts = cfg.multistarts.max(2);
    for s in 0..starts {
        let x0 = match s {
            0 => to_real_coords(&v_min),
            1 => real_part_start(&setup, &v_min),
            _ => random_start(&mut rng_for(cfg.rng_seed, index, s), k),
        };
        let f0 = quotient.eval(&x0, &mut sa, &mut sb);
        let (x, fx) = nelder_mead(|v| quotient.eval(v, &mut sa, &mut sb), &x0, &opts);
        let cand = if f0 <= fx { (x0, f0) } else { (x, fx) };
        if best.as_ref().map_or(true, |b| cand.1 < b.1) {
            best = Some(cand);
        }
    }
    let (y_best, f_best) = best.expect("at least one start");
    if !(f_best < quotient.penalty_scale) {
        return Err(Error::NoCandidate(format!(
            "no point of Ω satisfies the real existence conditions at w = {w}"
        )));
    }

    let y_hat = from_real_coords(&y_best);
    let x_hat = &setup.p * &y_hat;
    let xt = b.adjoint() * &sys.q * &x_hat;
    let yt = &setup.bpinv * &setup.m * &x_hat;
    let tol = TolerancePolicy {
        rank_rtol: Some(REAL_PAIR_RANK_RTOL),
        ..sys.tol
    };
    let to_mat = |v: &ComplexVector| ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let sol = real_min_norm_dissipative(&to_mat(&xt), &to_mat(&yt), &tol)?;
    let delta_j = numkit::skew_part(&sol.delta);
    let delta_r = -numkit::hermitian_part(&sol.delta);
    let perturbed_r = &sys.r + b * &delta_r * b.adjoint();
    let equality_certified = numkit::is_psd(&numkit::hermitian_part(&perturbed_r), &sys.tol)?;
    let eig_residual = eigen_residual(sys, b, &delta_j, &delta_r, w, &x_hat);
    let optimized_value = sol.frob_norm_sq.max(0.0).sqrt();
    Ok(EtaResult {
        w,
        lower_bound: sigma_min,
        upper_bound: optimized_value,
        optimized_value,
        x_hat,
        delta_j,
        delta_r,
        equality_certified,
        eig_residual,
        omega_dim: k,
    })
}
