//! Dense complex linear algebra helpers over `faer`.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::zeros(r, c)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

/// Eigenvalues in nondecreasing order and the matching orthonormal
/// eigenvectors (as columns) of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Convergence)?;
    let values = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Convergence)
}

pub fn min_eigenvalue(a: &CMat) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.first().copied().unwrap_or(0.0))
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values().map_err(|_| Error::Convergence)
}

/// Spectral (operator) norm.
pub fn op_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Orthonormal basis (columns) for the range of `a`, keeping singular
/// directions with singular value above `cutoff`.
pub fn range_basis(a: &CMat, cutoff: f64) -> Result<CMat> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(zeros(a.nrows(), 0));
    }
    let svd = a.thin_svd().map_err(|_| Error::Convergence)?;
    let s = svd.S().column_vector();
    let rank = s.iter().take_while(|v| v.re > cutoff).count();
    Ok(svd.U().get(.., ..rank).to_owned())
}

/// Moore-Penrose pseudo-inverse, discarding singular values at or below
/// `cutoff`.
pub fn pseudo_inverse(a: &CMat, cutoff: f64) -> Result<CMat> {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return Ok(zeros(n, m));
    }
    let svd = a.thin_svd().map_err(|_| Error::Convergence)?;
    let s = svd.S().column_vector();
    let u = svd.U();
    let v = svd.V();
    let mut out = zeros(n, m);
    for (k, sk) in s.iter().enumerate() {
        if sk.re <= cutoff {
            break;
        }
        let inv = 1.0 / sk.re;
        for j in 0..m {
            let uj = u[(j, k)].conj() * inv;
            if uj == ZERO {
                continue;
            }
            for i in 0..n {
                out[(i, j)] += v[(i, k)] * uj;
            }
        }
    }
    Ok(out)
}

/// Inverse of a small square matrix; `None` when it is numerically singular.
pub fn inverse(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    if n == 0 {
        return Some(zeros(0, 0));
    }
    let sv = singular_values(a).ok()?;
    let smin = *sv.last()?;
    if smin.is_nan() || smin <= 1e-14 * sv[0] {
        return None;
    }
    Some(a.partial_piv_lu().inverse())
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Compresses `a` to the subspace spanned by the orthonormal columns of `basis`.
pub fn compress(a: &CMat, basis: &CMat) -> CMat {
    basis.adjoint() * a * basis
}
