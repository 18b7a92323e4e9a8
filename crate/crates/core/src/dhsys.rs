//! Dissipative-Hamiltonian systems `x' = (J - R) Q x`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{self, c64, ComplexMatrix, TolerancePolicy};

/// Resolvents with a larger 2-norm condition number are treated as singular.
pub const MAX_RESOLVENT_COND: f64 = 1e-3 / f64::EPSILON;

/// Regularization added to `T T^*` by [`random_dh`].
pub const RANDOM_Q_SHIFT: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct DhSystem {
    pub j: ComplexMatrix,
    pub r: ComplexMatrix,
    pub q: ComplexMatrix,
    pub real: bool,
    pub tol: TolerancePolicy,
    /// `(J - R) Q`.
    pub a: ComplexMatrix,
}

impl DhSystem {
    pub fn n(&self) -> usize {
        self.j.nrows()
    }
}

/// Validates `J` skew-Hermitian, `R ⪰ 0`, `Q ≻ 0` and, for real systems,
/// that all three matrices are real.
pub fn validate_dh(
    j: ComplexMatrix,
    r: ComplexMatrix,
    q: ComplexMatrix,
    real: bool,
    tol: TolerancePolicy,
) -> Result<DhSystem> {
    tol.validate()?;
    let n = j.nrows();
    for (name, m) in [("J", &j), ("R", &r), ("Q", &q)] {
        if m.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    if n == 0 {
        return Err(Error::Shape("system matrices are empty".into()));
    }
    numkit::ensure_finite(&j, "J")?;
    numkit::ensure_finite(&r, "R")?;
    numkit::ensure_finite(&q, "Q")?;
    if !numkit::is_skew_hermitian(&j) {
        return Err(Error::Structure("J is not skew-Hermitian".into()));
    }
    if !numkit::is_hermitian(&r) {
        return Err(Error::Structure("R is not Hermitian".into()));
    }
    if !numkit::is_psd(&r, &tol)? {
        return Err(Error::Structure(format!(
            "R is not positive semidefinite (lambda_min {:e})",
            numkit::min_eigenvalue(&r)?
        )));
    }
    if !numkit::is_hermitian(&q) {
        return Err(Error::Structure("Q is not Hermitian".into()));
    }
    let eq = numkit::hermitian_eigenvalues(&q)?;
    let (qmin, qmax) = (eq[0], eq[n - 1].abs().max(eq[0].abs()));
    if !(qmin > tol.psd_tol * qmax) {
        return Err(Error::Structure(format!(
            "Q is not positive definite (lambda_min {qmin:e})"
        )));
    }
    if real {
        for (name, m) in [("J", &j), ("R", &r), ("Q", &q)] {
            if numkit::max_imag(m) != 0.0 {
                return Err(Error::Structure(format!(
                    "{name} has a nonzero imaginary part in a real system"
                )));
            }
        }
    }
    let a = (&j - &r) * &q;
    Ok(DhSystem {
        j,
        r,
        q,
        real,
        tol,
        a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    AsymptoticallyStable,
    MarginallyStable,
}

/// Largest real part over the spectrum of `(J - R) Q`.
pub fn spectral_abscissa(sys: &DhSystem) -> Result<f64> {
    Ok(numkit::eigenvalues(&sys.a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Asymptotically stable iff every eigenvalue of `(J - R) Q` has real part
/// below `-psd_tol * ||(J - R) Q||_2`.
pub fn stability_class(sys: &DhSystem) -> Result<StabilityClass> {
    let alpha = spectral_abscissa(sys)?;
    let norm = numkit::spectral_norm(&sys.a)?;
    if alpha > 1e-8 * norm.max(1.0) {
        return Err(Error::InternalConsistency(format!(
            "DH matrix has an eigenvalue with real part {alpha:e}"
        )));
    }
    Ok(if alpha < -sys.tol.psd_tol * norm {
        StabilityClass::AsymptoticallyStable
    } else {
        StabilityClass::MarginallyStable
    })
}

/// Restriction matrices `B` (n x r) and optional `C` (q x n).
#[derive(Debug, Clone)]
pub struct Restriction {
    pub b: ComplexMatrix,
    pub c: Option<ComplexMatrix>,
}

impl Restriction {
    pub fn new(b: ComplexMatrix, c: Option<ComplexMatrix>) -> Self {
        Self { b, c }
    }

    /// `C`, or `B^*` when none was given.
    pub fn c_or_adjoint(&self) -> ComplexMatrix {
        self.c.clone().unwrap_or_else(|| self.b.adjoint())
    }

    pub fn check_shapes(&self, n: usize) -> Result<()> {
        if self.b.nrows() != n {
            return Err(Error::Shape(format!(
                "B has {} rows, expected {n}",
                self.b.nrows()
            )));
        }
        numkit::ensure_finite(&self.b, "B")?;
        if let Some(c) = &self.c {
            if c.ncols() != n {
                return Err(Error::Shape(format!("C has {} columns, expected {n}", c.ncols())));
            }
            numkit::ensure_finite(c, "C")?;
        }
        Ok(())
    }

    /// Whether `C` is absent or equal to `B^*` to rounding.
    pub fn c_is_b_adjoint(&self) -> bool {
        match &self.c {
            None => true,
            Some(c) => {
                c.shape() == (self.b.ncols(), self.b.nrows())
                    && (c - self.b.adjoint()).norm() <= 1e-12 * self.b.norm().max(1.0)
            }
        }
    }

    pub fn require_full_column_rank(&self, tol: &TolerancePolicy) -> Result<()> {
        let r = self.b.ncols();
        if r == 0 {
            return Err(Error::Structure("B has no columns".into()));
        }
        let f = numkit::reduced_svd(&self.b, tol)?;
        if f.rank != r {
            return Err(Error::Structure(format!(
                "B has rank {} but {r} columns",
                f.rank
            )));
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        numkit::max_imag(&self.b) == 0.0 && self.c.as_ref().map_or(true, |c| numkit::max_imag(c) == 0.0)
    }
}

/// `i w I - (J - R) Q`, failing when it is numerically singular.
pub fn resolvent_matrix(sys: &DhSystem, w: f64) -> Result<ComplexMatrix> {
    if !w.is_finite() {
        return Err(Error::Domain("frequency must be finite".into()));
    }
    let n = sys.n();
    let m = ComplexMatrix::identity(n, n) * c64(0.0, w) - &sys.a;
    let cond = numkit::condition_number(&m)?;
    if !(cond <= MAX_RESOLVENT_COND) {
        return Err(Error::OnSpectrum { w, cond });
    }
    Ok(m)
}

/// `G(w) = C Q (i w I - (J - R) Q)^{-1} B`.
pub fn transfer_g(sys: &DhSystem, rst: &Restriction, w: f64) -> Result<ComplexMatrix> {
    rst.check_shapes(sys.n())?;
    let m = resolvent_matrix(sys, w)?;
    let sol = numkit::solve(&m, &rst.b)?;
    Ok(rst.c_or_adjoint() * &sys.q * sol)
}

/// Orthonormal basis `U` of `Ω = null((I - B B^+)(i w I - (J - R) Q))`
/// and a triangular factor `W` with `W W^* = U^* Q B B^* Q U`.
#[derive(Debug, Clone)]
pub struct OmegaBasis {
    pub w: f64,
    pub u: ComplexMatrix,
    pub w_chol: ComplexMatrix,
}

impl OmegaBasis {
    pub fn dim(&self) -> usize {
        self.u.ncols()
    }
}

/// Off the spectrum, `Ω` is the preimage of `range(B)` under the resolvent
/// matrix, so `U` is an orthonormal basis of `(i w I - A)^{-1} B`. Returns
/// `None` when `Ω` is trivial.
pub fn omega_basis(sys: &DhSystem, rst: &Restriction, w: f64) -> Result<Option<OmegaBasis>> {
    rst.check_shapes(sys.n())?;
    rst.require_full_column_rank(&sys.tol)?;
    let m = resolvent_matrix(sys, w)?;
    omega_from_resolvent(sys, &rst.b, &m, w)
}

pub(crate) fn omega_from_resolvent(
    sys: &DhSystem,
    b: &ComplexMatrix,
    m: &ComplexMatrix,
    w: f64,
) -> Result<Option<OmegaBasis>> {
    let pre = numkit::solve(m, b)?;
    let f = numkit::reduced_svd(&pre, &sys.tol)?;
    if f.rank == 0 {
        return Ok(None);
    }
    let u = f.u1;
    let bqu = b.adjoint() * &sys.q * &u;
    let w_chol = gram_factor(&bqu, &sys.tol)?;
    Ok(Some(OmegaBasis { w, u, w_chol }))
}

/// Lower triangular `W` with positive diagonal and `W W^* = F^* F`, taken
/// from the QR factorization of `F` so the Gram matrix is never formed.
fn gram_factor(f: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let (rows, k) = f.shape();
    let s = numkit::singular_values(f)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if rows < k || !(smin > tol.rank_rtol_for(rows, k) * smax) {
        return Err(Error::InternalConsistency(format!(
            "B^* Q U is rank deficient: singular values {smin:e} to {smax:e}"
        )));
    }
    let mut r = f.clone().qr().r();
    for i in 0..k {
        let d = r[(i, i)];
        let phase = d.unscale(d.norm()).conj();
        for j in i..k {
            r[(i, j)] *= phase;
        }
    }
    Ok(r.adjoint())
}

fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, real: bool) -> ComplexMatrix {
    let mut draw = || -> f64 { StandardNormal.sample(rng) };
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = draw();
            let im = if real { 0.0 } else { draw() };
            m[(i, j)] = c64(re, im);
        }
    }
    m
}

/// Seeded random DH system: `J = (A - A^*)/2`, `R = S S^*`,
/// `Q = T T^* + 1e-3 I` from standard normal `A, S, T`.
pub fn random_dh(seed: u64, n: usize, real: bool) -> Result<DhSystem> {
    if n == 0 {
        return Err(Error::Domain("system size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = normal_matrix(&mut rng, n, real);
    let s = normal_matrix(&mut rng, n, real);
    let t = normal_matrix(&mut rng, n, real);
    let j = numkit::skew_part(&a);
    let r = numkit::hermitian_part(&(&s * s.adjoint()));
    let q = numkit::hermitian_part(&(&t * t.adjoint()))
        + ComplexMatrix::identity(n, n) * c64(RANDOM_Q_SHIFT, 0.0);
    validate_dh(j, r, q, real, TolerancePolicy::default())
}

/// Convenience for real data given as `f64` matrices.
pub fn from_real_parts(
    j: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
    tol: TolerancePolicy,
) -> Result<DhSystem> {
    validate_dh(
        numkit::from_real(j),
        numkit::from_real(r),
        numkit::from_real(q),
        true,
        tol,
    )
}
