//! Dense complex linear-algebra kernel.
//!
//! Thin layer over `nalgebra` providing the rank-revealing pieces the mapping
//! and radius code needs: reduced SVD with an orthonormal complement,
//! pseudoinverse, projectors, Hermitian splitting, semidefiniteness tests,
//! Cholesky and null-space bases. Numerical rank is decided relative to the
//! largest singular value, with `max(rows, cols) * eps` as the default
//! relative threshold.

use nalgebra::{Cholesky, ComplexField, DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

const SVD_MAX_ITER: usize = 100_000;
const HERMITIAN_RTOL: f64 = 1e-10;

pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Relative singular value threshold for numerical rank. `None` means
    /// `max(rows, cols) * f64::EPSILON` for the matrix at hand.
    pub rank_rtol: Option<f64>,
    pub psd_tol: f64,
    pub residual_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_rtol: None,
            psd_tol: 1e-10,
            residual_tol: 1e-8,
        }
    }
}

impl TolerancePolicy {
    pub fn rank_rtol_for(&self, rows: usize, cols: usize) -> f64 {
        self.rank_rtol
            .unwrap_or(rows.max(cols).max(1) as f64 * f64::EPSILON)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.psd_tol) || !ok(self.residual_tol) || !self.rank_rtol.map_or(true, ok) {
            return Err(Error::Config(
                "tolerances must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Reduced SVD `A = U1 diag(sigma1) V1^*` together with an orthonormal
/// basis `U2` of the orthogonal complement of `range(A)`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    pub sigma1: Vec<f64>,
    pub v1: ComplexMatrix,
    pub rank: usize,
    /// Absolute threshold: every retained singular value exceeds it.
    pub rank_tol: f64,
}

impl SvdFactors {
    /// `U = [U1 U2]`.
    pub fn u(&self) -> ComplexMatrix {
        let n = self.u1.nrows();
        let mut u = ComplexMatrix::zeros(n, n);
        u.columns_mut(0, self.rank).copy_from(&self.u1);
        u.columns_mut(self.rank, n - self.rank).copy_from(&self.u2);
        u
    }
}

/// Builds a matrix from row-major entries, rejecting non-finite values.
pub fn from_row_major(rows: usize, cols: usize, data: &[Complex64]) -> Result<ComplexMatrix> {
    if data.len() != rows * cols {
        return Err(Error::Shape(format!(
            "{} entries given for a {rows}x{cols} matrix",
            data.len()
        )));
    }
    if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("matrix data"));
    }
    Ok(ComplexMatrix::from_row_slice(rows, cols, data))
}

pub fn from_real(a: &DMatrix<f64>) -> ComplexMatrix {
    a.map(|x| c64(x, 0.0))
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(a: &ComplexMatrix, what: &'static str) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Largest absolute imaginary part over all entries.
pub fn max_imag(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.im.abs()))
}

pub fn conj(a: &ComplexMatrix) -> ComplexMatrix {
    a.map(|z| z.conj())
}

/// `[A conj(A)]`.
pub fn augment_conj(a: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = a.shape();
    let mut out = ComplexMatrix::zeros(n, 2 * m);
    out.columns_mut(0, m).copy_from(a);
    out.columns_mut(m, m).copy_from(&conj(a));
    out
}

pub fn frobenius_sq(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `(A + A^*) / 2`, exactly Hermitian.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn skew_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a - a.adjoint()).scale(0.5)
}

/// Maximum number of one-sided Jacobi sweeps.
const JACOBI_MAX_SWEEPS: usize = 80;

/// Squared column norm below which a column of the max-scaled matrix is
/// treated as zero; smaller values lose precision to gradual underflow.
const JACOBI_TINY_SQ: f64 = f64::MIN_POSITIVE / f64::EPSILON;

/// One-sided (Hestenes) Jacobi on the columns of `w`, which must have at
/// least as many rows as columns. On return the columns of `w` are mutually
/// orthogonal and `w_in * v = w`.
fn jacobi_orthogonalize<T>(w: &mut DMatrix<T>, v: &mut DMatrix<T>) -> Result<()>
where
    T: ComplexField<RealField = f64>,
{
    let (rows, n) = w.shape();
    let tol = (rows as f64).sqrt() * f64::EPSILON;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, T::zero());
                for k in 0..rows {
                    let (x, y) = (w[(k, p)].clone(), w[(k, q)].clone());
                    alpha += x.clone().modulus_squared();
                    beta += y.clone().modulus_squared();
                    gamma += x.conjugate() * y;
                }
                let g = gamma.clone().modulus();
                if alpha < JACOBI_TINY_SQ || beta < JACOBI_TINY_SQ || g <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate (w_p, conj(phase) w_q) by a real Jacobi rotation.
                let phase_conj = gamma.unscale(g).conjugate();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (tc, ts) = (T::from_real(c), T::from_real(s));
                for m in [&mut *w, &mut *v] {
                    for k in 0..m.nrows() {
                        let x = m[(k, p)].clone();
                        let y = m[(k, q)].clone() * phase_conj.clone();
                        m[(k, p)] = tc.clone() * x.clone() - ts.clone() * y.clone();
                        m[(k, q)] = ts.clone() * x + tc.clone() * y;
                    }
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::Decomposition("Jacobi SVD did not converge"))
}

/// Extends orthonormal columns `u1` (with `r` columns, some possibly zero
/// and flagged by `zero`) to orthonormal columns spanning the same count.
fn fill_zero_columns<T>(u: &mut DMatrix<T>, zero: &[bool])
where
    T: ComplexField<RealField = f64>,
{
    if !zero.iter().any(|&z| z) {
        return;
    }
    let rows = u.nrows();
    let keep: Vec<usize> = (0..u.ncols()).filter(|&j| !zero[j]).collect();
    let mut aug = DMatrix::<T>::zeros(rows, keep.len() + rows);
    for (i, &j) in keep.iter().enumerate() {
        aug.set_column(i, &u.column(j));
    }
    for i in 0..rows {
        aug[(i, keep.len() + i)] = T::one();
    }
    let q = aug.qr().q();
    let mut next = keep.len();
    for j in 0..u.ncols() {
        if zero[j] {
            u.set_column(j, &q.column(next));
            next += 1;
        }
    }
}

/// SVD of a matrix with at least as many rows as columns: `(U, s, V)` with
/// `U` rows x cols, `V` cols x cols, `s` descending.
fn jacobi_svd_tall<T>(a: &DMatrix<T>) -> Result<(DMatrix<T>, Vec<f64>, DMatrix<T>)>
where
    T: ComplexField<RealField = f64>,
{
    let n = a.ncols();
    let scale = a.iter().map(|z| z.clone().modulus()).fold(0.0, f64::max);
    let mut w = if scale > 0.0 { a.unscale(scale) } else { a.clone() };
    let mut v = DMatrix::<T>::identity(n, n);
    jacobi_orthogonalize(&mut w, &mut v)?;
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let negligible = JACOBI_TINY_SQ.sqrt();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let mut u = DMatrix::<T>::zeros(a.nrows(), n);
    let mut vs = DMatrix::<T>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut zero = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma * scale);
        zero.push(sigma <= negligible);
        if sigma > negligible {
            u.set_column(dst, &w.column(src).unscale(sigma));
        }
        vs.set_column(dst, &v.column(src));
    }
    fill_zero_columns(&mut u, &zero);
    Ok((u, s, vs))
}

/// Thin SVD `A = U diag(s) V^*` with `U` n x k, `V` m x k, `k = min(n, m)`
/// and `s` descending. Computed by one-sided Jacobi, which stays accurate on
/// rank-deficient input.
fn svd_generic<T>(a: &DMatrix<T>) -> Result<(DMatrix<T>, Vec<f64>, DMatrix<T>)>
where
    T: ComplexField<RealField = f64>,
{
    let (n, m) = a.shape();
    if n.min(m) == 0 {
        return Ok((DMatrix::zeros(n, 0), Vec::new(), DMatrix::zeros(m, 0)));
    }
    if !a.iter().all(|z| z.clone().is_finite()) {
        return Err(Error::NonFinite("SVD input"));
    }
    if n >= m {
        jacobi_svd_tall(a)
    } else {
        let (u, s, v) = jacobi_svd_tall(&a.adjoint())?;
        Ok((v, s, u))
    }
}

fn svd_thin(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    svd_generic(a)
}

/// Singular values of a real matrix in descending order.
pub fn real_singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (_, s, _) = svd_generic(a)?;
    Ok(s)
}

/// Reduced SVD with numerical rank `#{ sigma_i > rtol * sigma_max }`.
pub fn reduced_svd(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<SvdFactors> {
    let (n, m) = a.shape();
    if n == 0 || m == 0 {
        return Err(Error::Shape("reduced_svd of an empty matrix".into()));
    }
    let rtol = tol.rank_rtol_for(n, m);
    // Pad with zero columns so that the left factor is a full n x n unitary.
    let padded;
    let work = if n > m {
        padded = {
            let mut p = ComplexMatrix::zeros(n, n);
            p.columns_mut(0, m).copy_from(a);
            p
        };
        &padded
    } else {
        a
    };
    let (u, s, v) = svd_thin(work)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let thresh = rtol * smax;
    let rank = if smax > 0.0 {
        s.iter().take(n.min(m)).filter(|&&x| x > thresh).count()
    } else {
        0
    };
    let u_full = u.columns(0, n).into_owned();
    Ok(SvdFactors {
        u1: u_full.columns(0, rank).into_owned(),
        u2: u_full.columns(rank, n - rank).into_owned(),
        sigma1: s[..rank].to_vec(),
        v1: v.view((0, 0), (m, rank)).into_owned(),
        rank,
        rank_tol: thresh,
    })
}

/// Moore–Penrose pseudoinverse with the default relative rank threshold.
pub fn pseudoinverse(a: &ComplexMatrix) -> ComplexMatrix {
    pseudoinverse_with(a, &TolerancePolicy::default())
        .unwrap_or_else(|_| ComplexMatrix::zeros(a.ncols(), a.nrows()))
}

/// Pseudoinverse `V1 diag(1/sigma1) U1^*` using the rank threshold in `tol`.
pub fn pseudoinverse_with(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let (n, m) = a.shape();
    let smax = singular_values(a)?.first().copied().unwrap_or(0.0);
    pseudoinverse_above(a, tol.rank_rtol_for(n, m) * smax)
}

/// Pseudoinverse dropping singular values at or below the absolute
/// threshold `thresh`.
pub fn pseudoinverse_above(a: &ComplexMatrix, thresh: f64) -> Result<ComplexMatrix> {
    let (n, m) = a.shape();
    ensure_finite(a, "pseudoinverse input")?;
    let (u, s, v) = svd_thin(a)?;
    let mut out = ComplexMatrix::zeros(m, n);
    for (i, &si) in s.iter().enumerate() {
        if si > thresh && si > 0.0 {
            let vi = v.column(i);
            let ui = u.column(i);
            out += (vi * ui.adjoint()).unscale(si);
        }
    }
    Ok(out)
}

/// `I - A A^+`: orthogonal projector onto `null(A^*)`.
pub fn null_projector(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    ComplexMatrix::identity(n, n) - a * pseudoinverse(a)
}

pub fn null_projector_with(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let n = a.nrows();
    Ok(ComplexMatrix::identity(n, n) - a * pseudoinverse_with(a, tol)?)
}

/// Returns `(A_H, A_S)` with `A = A_H + A_S`.
pub fn hermitian_split(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    require_square(a, "hermitian_split")?;
    Ok((hermitian_part(a), skew_part(a)))
}

pub fn require_square(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{what} needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

/// `||A - A^*||_F <= 1e-10 ||A||_F`.
pub fn is_hermitian(a: &ComplexMatrix) -> bool {
    a.is_square() && (a - a.adjoint()).norm() <= HERMITIAN_RTOL * a.norm()
}

/// `||A + A^*||_F <= 1e-10 ||A||_F`.
pub fn is_skew_hermitian(a: &ComplexMatrix) -> bool {
    a.is_square() && (a + a.adjoint()).norm() <= HERMITIAN_RTOL * a.norm()
}

/// Ascending eigenvalues of the Hermitian part of `a`.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    require_square(a, "hermitian_eigenvalues")?;
    ensure_finite(a, "eigenvalue input")?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::try_new(hermitian_part(a), f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::Decomposition("Hermitian eigensolver did not converge"))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Smallest eigenvalue of the Hermitian part (`+inf` for an empty matrix).
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY))
}

fn require_hermitian(a: &ComplexMatrix, what: &str) -> Result<()> {
    require_square(a, what)?;
    if !is_hermitian(a) {
        return Err(Error::Structure(format!("{what}: matrix is not Hermitian")));
    }
    Ok(())
}

/// `lambda_min(A) >= -psd_tol * max(1, ||A||_2)` for Hermitian `A`.
pub fn is_psd(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<bool> {
    require_hermitian(a, "is_psd")?;
    let eigs = hermitian_eigenvalues(a)?;
    let (Some(&lo), Some(&hi)) = (eigs.first(), eigs.last()) else {
        return Ok(true);
    };
    let norm2 = lo.abs().max(hi.abs());
    Ok(lo >= -tol.psd_tol * norm2.max(1.0))
}

/// Lower-triangular `L` with `L L^* = A`, for Hermitian positive definite `A`.
pub fn cholesky_factor(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    require_hermitian(a, "cholesky_factor")?;
    let eigs = hermitian_eigenvalues(a)?;
    if let (Some(&lo), Some(&hi)) = (eigs.first(), eigs.last()) {
        let norm2 = lo.abs().max(hi.abs());
        if !(lo > tol.psd_tol * norm2) || norm2 == 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "smallest eigenvalue {lo:e} against norm {norm2:e}"
            )));
        }
    }
    let chol = Cholesky::new(hermitian_part(a))
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky breakdown".into()))?;
    Ok(chol.unpack())
}

/// Orthonormal basis of `{x : ||A x|| <= rtol ||A||_2 ||x||}`, taken from the
/// right singular vectors. Returns a matrix with zero columns when the null
/// space is trivial.
pub fn null_space_basis(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let (n, m) = a.shape();
    if m == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    if n == 0 {
        return Ok(ComplexMatrix::identity(m, m));
    }
    let padded;
    let work = if n < m {
        padded = {
            let mut p = ComplexMatrix::zeros(m, m);
            p.rows_mut(0, n).copy_from(a);
            p
        };
        &padded
    } else {
        a
    };
    let (_, s, v) = svd_thin(work)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let thresh = tol.rank_rtol_for(n, m) * smax;
    let rank = if smax > 0.0 {
        s.iter().take(n.min(m)).filter(|&&x| x > thresh).count()
    } else {
        0
    };
    Ok(v.columns(rank, m - rank).into_owned())
}

/// The `k`-th largest singular value (1-based).
pub fn singular_value(a: &ComplexMatrix, k: usize) -> Result<f64> {
    let max = a.nrows().min(a.ncols());
    if k == 0 || k > max {
        return Err(Error::IndexOutOfRange { index: k, max });
    }
    Ok(singular_values(a)?[k - 1])
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    ensure_finite(a, "singular value input")?;
    if a.nrows().min(a.ncols()) == 0 {
        return Ok(Vec::new());
    }
    let (_, s, _) = svd_thin(a)?;
    Ok(s)
}

pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Top singular triple `(sigma_1, u_1, v_1)`.
pub fn top_singular_pair(a: &ComplexMatrix) -> Result<(f64, ComplexVector, ComplexVector)> {
    let (u, s, v) = svd_thin(a)?;
    let s1 = *s
        .first()
        .ok_or_else(|| Error::Shape("empty matrix has no singular pair".into()))?;
    Ok((s1, u.column(0).into_owned(), v.column(0).into_owned()))
}

/// Smallest singular triple of a matrix with at least as many rows as columns.
pub fn bottom_singular_pair(a: &ComplexMatrix) -> Result<(f64, ComplexVector, ComplexVector)> {
    let (n, m) = a.shape();
    if n < m || m == 0 {
        return Err(Error::Shape(format!(
            "bottom_singular_pair needs rows >= cols > 0, got {n}x{m}"
        )));
    }
    let (u, s, v) = svd_thin(a)?;
    let k = m - 1;
    Ok((s[k], u.column(k).into_owned(), v.column(k).into_owned()))
}

/// Eigenvalues of a general complex square matrix (complex Schur form).
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    require_square(a, "eigenvalues")?;
    ensure_finite(a, "eigenvalue input")?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::Decomposition("Schur iteration did not converge"))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// 2-norm condition number `sigma_max / sigma_min` of a square matrix.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64> {
    require_square(a, "condition_number")?;
    let s = singular_values(a)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Solves `A X = B` for square nonsingular `A` by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square(a, "solve")?;
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Structure("singular linear system".into()))
}
