//! Real embeddings of complex linear and Hermitian forms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::numeric::{CMatrix, CVector};
use crate::{Error, Result};

/// Relative tolerance for Hermitian symmetry.
const HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue (relative to the spectral scale) accepted as
/// round-off.
const NEGATIVE_EIG_TOL: f64 = 1e-9;

/// `[Re v; Im v]`.
pub fn real_vector(v: &CVector) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`real_vector`].
pub fn complex_vector(x: &[f64]) -> CVector {
    let n = x.len() / 2;
    CVector::from_fn(n, |i, _| crate::C64::new(x[i], x[n + i]))
}

/// Real matrix acting on `[Re w; Im w]` like `a` acts on `w`:
/// `[[Re a, -Im a], [Im a, Re a]]`.
pub fn real_matrix(a: &CMatrix) -> DMatrix<f64> {
    let (m, n) = a.shape();
    DMatrix::from_fn(2 * m, 2 * n, |i, j| {
        let z = a[(i % m, j % n)];
        match (i < m, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn check_hermitian(psi: &CMatrix) -> Result<()> {
    if !psi.is_square() {
        return Err(Error::Dimension(format!("form is {}x{}", psi.nrows(), psi.ncols())));
    }
    let asym = (psi - psi.adjoint()).norm();
    if asym > HERMITIAN_TOL * (1.0 + psi.norm()) {
        return Err(Error::Matrix(format!("form is not Hermitian (asymmetry {asym:e})")));
    }
    Ok(())
}

/// Real symmetric `M` with `x^T M x = w^H psi w` for `x = [Re w; Im w]`.
pub fn hermitian_form(psi: &CMatrix) -> Result<DMatrix<f64>> {
    check_hermitian(psi)?;
    Ok(real_matrix(psi))
}

/// Real vector `g` with `g^T x = 2 Re{omega^H w}`.
pub fn linear_form(omega: &CVector) -> DVector<f64> {
    real_vector(omega) * 2.0
}

/// Rank-revealing factor `L` with `L L^H = psi` for a Hermitian PSD `psi`.
/// Eigenvalues within round-off of zero are dropped, so the zero matrix
/// yields a factor with no columns.
pub fn psd_factor(psi: &CMatrix) -> Result<CMatrix> {
    check_hermitian(psi)?;
    let n = psi.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let sym = (psi + psi.adjoint()) * crate::C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVE_EIG_TOL * scale.max(1.0) {
        return Err(Error::Matrix(format!("form is indefinite (eigenvalue {min:e})")));
    }
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 1e-14 * scale).collect();
    Ok(CMatrix::from_fn(n, keep.len(), |r, c| {
        let i = keep[c];
        eig.eigenvectors[(r, i)] * eig.eigenvalues[i].sqrt()
    }))
}
