//! Structured eigenvalue backward error for complex perturbations.
//!
//! Points of `Ω` are parametrized as `x = U W^{-*} y`, which makes
//! `||B^* Q x|| = ||y||`. On the unit sphere the quotient becomes
//! `f(y) = 2 ||T y||^2 - |y^* S y|^2` with `T = B^+ (iwI - A) U W^{-*}` and
//! `S = W^{-1} U^* Q (iwI - A) U W^{-*}`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::neldermead::{nelder_mead, NmOptions};
use super::sweep::{rng_for, SweepConfig};
use super::EtaResult;
use crate::dhsys::{self, DhSystem, OmegaBasis};
use crate::error::{Error, Result};
use crate::mappings::min_norm_dissipative_vector;
use crate::numkit::{self, c64, ComplexMatrix, ComplexVector};

/// Frequency-dependent data shared by the complex and real objectives.
pub(crate) struct EtaSetup {
    pub w: f64,
    /// `i w I - A`.
    pub m: ComplexMatrix,
    pub omega: OmegaBasis,
    /// `U W^{-*}`: maps `y` to `x`.
    pub p: ComplexMatrix,
    /// `B^+ (iwI - A) U W^{-*}`: maps `y` to `B^+ (iwI - A) x`.
    pub t: ComplexMatrix,
    /// `B^* Q U W^{-*}`: maps `y` to `B^* Q x`.
    pub xq: ComplexMatrix,
    pub bpinv: ComplexMatrix,
}

impl EtaSetup {
    pub fn new(sys: &DhSystem, b: &ComplexMatrix, bpinv: &ComplexMatrix, w: f64) -> Result<Self> {
        let m = dhsys::resolvent_matrix(sys, w)?;
        let omega = dhsys::omega_from_resolvent(sys, b, &m, w)?
            .ok_or_else(|| Error::NoCandidate("Ω is trivial".into()))?;
        let k = omega.dim();
        // W^{-*} = (W^*)^{-1}, with W^* upper triangular.
        let w_adj_inv = omega
            .w_chol
            .adjoint()
            .solve_upper_triangular(&ComplexMatrix::identity(k, k))
            .ok_or_else(|| Error::InternalConsistency("singular Cholesky factor W".into()))?;
        let p = &omega.u * &w_adj_inv;
        let t = bpinv * &m * &p;
        let xq = b.adjoint() * &sys.q * &p;
        Ok(Self {
            w,
            m,
            omega,
            p,
            t,
            xq,
            bpinv: bpinv.clone(),
        })
    }

    pub fn k(&self) -> usize {
        self.omega.dim()
    }

    /// `(σ_min(T), right singular vector)`.
    pub fn sigma_min(&self) -> Result<(f64, ComplexVector)> {
        let (s, _, v) = numkit::bottom_singular_pair(&self.t)?;
        Ok((s, v))
    }
}

/// Dense column-major copies for allocation-free objective evaluation.
struct Quotient {
    k: usize,
    rows: usize,
    t: Vec<Complex64>,
    s: Vec<Complex64>,
}

impl Quotient {
    fn new(setup: &EtaSetup, sys: &DhSystem) -> Self {
        // S = (U W^{-*})^* Q (iwI - A) (U W^{-*}).
        let s = setup.p.adjoint() * &sys.q * &setup.m * &setup.p;
        Self {
            k: setup.k(),
            rows: setup.t.nrows(),
            t: setup.t.as_slice().to_vec(),
            s: s.as_slice().to_vec(),
        }
    }

    /// Quotient at `y` given as `[Re y, Im y]`, normalized internally.
    fn eval(&self, v: &[f64], y: &mut [Complex64]) -> f64 {
        let k = self.k;
        let mut nrm = 0.0;
        for i in 0..k {
            y[i] = c64(v[i], v[k + i]);
            nrm += y[i].norm_sqr();
        }
        if !(nrm > 0.0) || !nrm.is_finite() {
            return f64::INFINITY;
        }
        let mut ty = 0.0;
        for r in 0..self.rows {
            let mut acc = c64(0.0, 0.0);
            for j in 0..k {
                acc += self.t[j * self.rows + r] * y[j];
            }
            ty += acc.norm_sqr();
        }
        let mut ysy = c64(0.0, 0.0);
        for j in 0..k {
            let mut acc = c64(0.0, 0.0);
            for i in 0..k {
                acc += self.s[j * k + i] * y[j] * y[i].conj();
            }
            ysy += acc;
        }
        2.0 * ty / nrm - ysy.norm_sqr() / (nrm * nrm)
    }
}

pub(crate) fn to_real_coords(y: &ComplexVector) -> Vec<f64> {
    let k = y.len();
    let mut v = vec![0.0; 2 * k];
    for i in 0..k {
        v[i] = y[i].re;
        v[k + i] = y[i].im;
    }
    v
}

pub(crate) fn from_real_coords(v: &[f64]) -> ComplexVector {
    let k = v.len() / 2;
    let y = ComplexVector::from_fn(k, |i, _| c64(v[i], v[k + i]));
    let n = y.norm();
    if n > 0.0 {
        y.unscale(n)
    } else {
        y
    }
}

pub(crate) fn random_start<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..2 * k).map(|_| rng.sample(StandardNormal)).collect()
}

pub(crate) fn nm_options(k: usize) -> NmOptions {
    NmOptions {
        step: 0.2,
        max_evals: 300 * (2 * k) + 200,
        ftol: 1e-14,
    }
}

/// Evaluates the structured backward error at `iw`. `index` selects the
/// random streams used by the multistart search.
pub(crate) fn eta_complex_at(
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
    let quotient = Quotient::new(&setup, sys);
    let mut scratch = vec![c64(0.0, 0.0); k];

    let start0 = to_real_coords(&v_min);
    let mut best = (start0.clone(), quotient.eval(&start0, &mut scratch));
    // For k = 1 the quotient is constant on the unit circle.
    if k > 1 {
        let opts = nm_options(k);
        for s in 0..cfg.multistarts {
            let x0 = if s == 0 {
                start0.clone()
            } else {
                random_start(&mut rng_for(cfg.rng_seed, index, s), k)
            };
            let (x, fx) = nelder_mead(|v| quotient.eval(v, &mut scratch), &x0, &opts);
            if fx < best.1 {
                best = (x, fx);
            }
        }
    }

    let y_hat = from_real_coords(&best.0);
    let x_hat = &setup.p * &y_hat;
    finish_complex(sys, b, &setup, sigma_min, x_hat)
}

fn finish_complex(
    sys: &DhSystem,
    b: &ComplexMatrix,
    setup: &EtaSetup,
    sigma_min: f64,
    x_hat: ComplexVector,
) -> Result<EtaResult> {
    let xt = b.adjoint() * &sys.q * &x_hat;
    let yt = &setup.bpinv * &setup.m * &x_hat;
    let sol = min_norm_dissipative_vector(&xt, &yt, &sys.tol)?;
    let delta_j = numkit::skew_part(&sol.delta);
    let delta_r = -numkit::hermitian_part(&sol.delta);
    let perturbed_r = &sys.r + b * &delta_r * b.adjoint();
    let equality_certified = numkit::is_psd(&numkit::hermitian_part(&perturbed_r), &sys.tol)?;
    let eig_residual = eigen_residual(sys, b, &delta_j, &delta_r, setup.w, &x_hat);
    Ok(EtaResult {
        w: setup.w,
        lower_bound: sigma_min,
        upper_bound: std::f64::consts::SQRT_2 * sigma_min,
        optimized_value: sol.frob_norm_sq.max(0.0).sqrt(),
        x_hat,
        delta_j,
        delta_r,
        equality_certified,
        eig_residual,
        omega_dim: setup.k(),
    })
}

/// `||((J - R)Q + B(Δ_J - Δ_R)B^*Q - iwI) x|| / ||x||`.
pub fn eigen_residual(
    sys: &DhSystem,
    b: &ComplexMatrix,
    delta_j: &ComplexMatrix,
    delta_r: &ComplexMatrix,
    w: f64,
    x: &ComplexVector,
) -> f64 {
    let qx = &sys.q * x;
    let r = &sys.a * x + b * ((delta_j - delta_r) * (b.adjoint() * qx)) - x * c64(0.0, w);
    r.norm() / x.norm()
}
