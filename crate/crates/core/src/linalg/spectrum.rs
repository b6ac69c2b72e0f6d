//! Spectral quantities, evaluated in double precision through `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::linalg::matrix::CMatrix;
use crate::scalar::Real;

fn to_nalgebra<T: Real>(m: &CMatrix<T>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        Complex64::new(z.re.as_f64(), z.im.as_f64())
    })
}

/// Eigenvalues of the hermitian part `(M + M†)/2`, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<f64> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    let a = to_nalgebra(m);
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut vals: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

pub fn min_hermitian_eigenvalue<T: Real>(m: &CMatrix<T>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::NAN)
}

/// Schatten 1-norm (sum of singular values).
pub fn trace_norm<T: Real>(m: &CMatrix<T>) -> f64 {
    to_nalgebra(m).singular_values().iter().sum()
}
