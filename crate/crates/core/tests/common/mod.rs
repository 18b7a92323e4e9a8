//! Samplers and reference computations shared by the integration tests.
//! Oracles here use nalgebra's Hermitian eigensolver rather than the
//! library's helpers.
#![allow(dead_code)]

use dissipative::dhsys::{self, DhSystem, Restriction};
use dissipative::numkit::{c64, ComplexMatrix, ComplexVector, TolerancePolicy};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize, real: bool) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
        c64(re, im)
    })
}

/// Random `rows x cols` matrix of rank `rank` (almost surely).
pub fn with_rank<R: Rng>(rng: &mut R, rows: usize, cols: usize, rank: usize, real: bool) -> ComplexMatrix {
    if rank == 0 {
        return ComplexMatrix::zeros(rows, cols);
    }
    gaussian(rng, rows, rank, real) * gaussian(rng, rank, cols, real)
}

/// `S + L L^*` with `S` skew and `L` of random width, so `Δ + Δ^* ⪰ 0`.
pub fn random_dissipative<R: Rng>(rng: &mut R, n: usize, real: bool) -> ComplexMatrix {
    let a = gaussian(rng, n, n, real);
    let s = (&a - a.adjoint()).scale(0.5);
    let w = rng.random_range(0..=n);
    let l = gaussian(rng, n, w, real);
    s + &l * l.adjoint()
}

pub struct Instance {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub rank: usize,
}

/// Feasible pair `(X, Δ0 X)` with `n, m <= 8` and `rank X` drawn from
/// `0..=min(n, m)`.
pub fn feasible_instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let n = r.random_range(1..=8);
    let m = r.random_range(1..=8);
    let rank = r.random_range(0..=n.min(m));
    let x = with_rank(&mut r, n, m, rank, false);
    let d0 = random_dissipative(&mut r, n, false);
    let y = &d0 * &x;
    Instance { x, y, rank }
}

pub fn adjoint_vec(v: &ComplexVector) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice()).adjoint()
}

/// `[[0, A], [A^*, 0]]`, whose eigenpairs carry the singular triplets of `A`.
fn jordan_wielandt(a: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = a.shape();
    let mut h = ComplexMatrix::zeros(n + m, n + m);
    h.view_mut((0, n), (n, m)).copy_from(a);
    h.view_mut((n, 0), (m, n)).copy_from(&a.adjoint());
    h
}

/// Pseudoinverse with singular values below `1e-10 * σ_max` dropped.
pub fn pinv(a: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = a.shape();
    let mut out = ComplexMatrix::zeros(m, n);
    if a.is_empty() {
        return out;
    }
    let eig = jordan_wielandt(a).symmetric_eigen();
    let smax = eig.eigenvalues.max();
    if smax <= 0.0 {
        return out;
    }
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 1e-10 * smax {
            let w = eig.eigenvectors.column(k);
            let top = w.rows(0, n).into_owned();
            let bot = w.rows(n, m).into_owned();
            out += (bot * top.adjoint()).scale(2.0 / lam);
        }
    }
    out
}

pub fn frob_sq(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `2 ||YX^+||_F^2 - tr((YX^+)^* XX^+ YX^+)`.
pub fn min_norm_sq_oracle(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let yx = y * pinv(x);
    let pr = x * pinv(x);
    2.0 * frob_sq(&yx) - trace(&(yx.adjoint() * pr * &yx)).re
}

pub fn herm_eigs(a: &ComplexMatrix) -> Vec<f64> {
    let h = (a + a.adjoint()).scale(0.5);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eig_sym(delta: &ComplexMatrix) -> f64 {
    herm_eigs(&(delta + delta.adjoint()))[0]
}

pub fn spectral(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    jordan_wielandt(a).symmetric_eigenvalues().max()
}

pub fn real_scalar(x: f64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, c64(x, 0.0))
}

/// `(J, R, Q, B, C) = (0, r, 1, 1, 1)`.
pub fn scalar_system(r: f64) -> (DhSystem, Restriction) {
    let sys = dhsys::validate_dh(
        real_scalar(0.0),
        real_scalar(r),
        real_scalar(1.0),
        true,
        TolerancePolicy::default(),
    )
    .unwrap();
    (sys, Restriction::new(real_scalar(1.0), Some(real_scalar(1.0))))
}

/// Seeded DH system with a random full column rank `B` (`C = B^*`).
pub fn random_instance(seed: u64, n: usize, cols: usize, real: bool) -> (DhSystem, Restriction) {
    let sys = dhsys::random_dh(seed, n, real).unwrap();
    let mut r = rng(seed ^ 0x5eed_b0b);
    let b = gaussian(&mut r, n, cols, real);
    (sys, Restriction::new(b, None))
}

/// Second largest singular value of the `γ`-scaled real block matrix.
pub fn sigma2_oracle(m: &ComplexMatrix, gamma: f64) -> f64 {
    let (q, r) = m.shape();
    let re = DMatrix::from_fn(q, r, |i, j| m[(i, j)].re);
    let im = DMatrix::from_fn(q, r, |i, j| m[(i, j)].im);
    let mut blk = DMatrix::<f64>::zeros(2 * q, 2 * r);
    blk.view_mut((0, 0), (q, r)).copy_from(&re);
    blk.view_mut((q, r), (q, r)).copy_from(&re);
    blk.view_mut((0, r), (q, r)).copy_from(&(&im * -gamma));
    blk.view_mut((q, 0), (q, r)).copy_from(&(&im / gamma));
    // Eigenvalues of [[0, B], [B^T, 0]] are ±σ_i padded with zeros.
    let (rows, cols) = blk.shape();
    let mut h = DMatrix::<f64>::zeros(rows + cols, rows + cols);
    h.view_mut((0, rows), (rows, cols)).copy_from(&blk);
    h.view_mut((rows, 0), (cols, rows)).copy_from(&blk.transpose());
    let mut s: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s[1].max(0.0)
}

/// `inf_γ σ_2` from a 10^4-point log grid on `[1e-8, 1]` followed by a
/// second 10^4-point grid over the two cells around the best point.
pub fn mu_oracle(m: &ComplexMatrix) -> f64 {
    const N: usize = 10_000;
    let (lo, hi) = (1e-8f64.ln(), 0.0f64);
    let grid = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (N - 1) as f64;
    let mut best = (0, f64::INFINITY);
    for i in 0..N {
        let v = sigma2_oracle(m, grid(lo, hi, i).exp());
        if v < best.1 {
            best = (i, v);
        }
    }
    let a = grid(lo, hi, best.0.saturating_sub(1));
    let b = grid(lo, hi, (best.0 + 1).min(N - 1));
    let mut v = best.1;
    for i in 0..N {
        v = v.min(sigma2_oracle(m, grid(a, b, i).exp()));
    }
    v
}

/// Random `(K, G, Z)` valid for the first characterization, built so that
/// the coupling block is `N2 = C N1` and `U2^*K U2 = schur_scale C N1 C^* + E E^*`.
/// `schur_scale = 0.5` with `E = 0` sits exactly on the Schur boundary.
pub fn first_family_sample<R: Rng>(
    rng: &mut R,
    p: &dissipative::mappings::MappingProblem,
    schur_scale: f64,
    slack: bool,
) -> dissipative::mappings::FamilyParams {
    use dissipative::mappings::{FamilyParams, FamilyVariant};
    let n = p.n();
    let (u1, u2) = (&p.svd.u1, &p.svd.u2);
    let (r, k) = (u1.ncols(), u2.ncols());
    let mut scale = || 10f64.powf(rng.random_range(-2.0..0.5));
    let (s_c, s_e, s_g, s_j) = (scale(), scale(), scale(), scale());
    let yx = &p.yxdag;
    let n1 = u1.adjoint() * (yx + yx.adjoint()) * u1;
    let c = gaussian(rng, k, r, false).scale(s_c);
    let zmin = (u1 * u1.adjoint() * yx.adjoint() * u2 * u2.adjoint()).scale(-2.0);
    let d = u1 * &n1 * c.adjoint() * u2.adjoint();
    let junk = u2 * gaussian(rng, k, r, false).scale(s_j) * u1.adjoint();
    let z = zmin + d + junk;
    let e = if slack {
        gaussian(rng, k, k, false).scale(s_e)
    } else {
        ComplexMatrix::zeros(k, k)
    };
    let kk = (&c * &n1 * c.adjoint()).scale(schur_scale) + &e * e.adjoint();
    let l = gaussian(rng, r, r, false).scale(s_e);
    let kmat = u2 * kk * u2.adjoint() + u1 * &l * l.adjoint() * u1.adjoint();
    let kmat = (&kmat + kmat.adjoint()).scale(0.5);
    let a = gaussian(rng, n, n, false).scale(s_g);
    let g = (&a - a.adjoint()).scale(0.5);
    FamilyParams {
        k: kmat,
        g,
        z,
        variant: FamilyVariant::First,
    }
}

/// `YX^+ + (YX^+)^* P + XX^+ Z P + P (K + G) P` evaluated directly.
pub fn first_family_oracle(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    params: &dissipative::mappings::FamilyParams,
) -> ComplexMatrix {
    let n = x.nrows();
    let yx = y * pinv(x);
    let pr = x * pinv(x);
    let p = ComplexMatrix::identity(n, n) - &pr;
    &yx + yx.adjoint() * &p + &pr * &params.z * &p + &p * (&params.k + &params.g) * &p
}

/// Random `(K ⪰ 0, G skew, Z)` for the second characterization.
pub fn second_family_sample<R: Rng>(rng: &mut R, n: usize) -> dissipative::mappings::FamilyParams {
    let s = 10f64.powf(rng.random_range(-2.0..0.5));
    let w = rng.random_range(0..=n);
    let l = gaussian(rng, n, w, false).scale(s);
    let a = gaussian(rng, n, n, false).scale(s);
    dissipative::mappings::FamilyParams {
        k: &l * l.adjoint(),
        g: (&a - a.adjoint()).scale(0.5),
        z: gaussian(rng, n, n, false).scale(s),
        variant: dissipative::mappings::FamilyVariant::Second,
    }
}
