//! Dense eigen-decompositions backed by faer.

use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn to_faer(m: &DMatrix<Complex64>) -> Mat<faer::c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let e = to_faer(m).eigenvalues().expect("eigenvalue iteration failed");
    e.into_iter().map(|z| Complex64::new(z.re, z.im)).collect()
}

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn eigen(m: &DMatrix<Complex64>) -> (Vec<Complex64>, DMatrix<Complex64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let e = to_faer(m).eigen().expect("eigen decomposition failed");
    let s = e.S().column_vector();
    let u = e.U();
    let vals = (0..n).map(|i| Complex64::new(s[i].re, s[i].im)).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| {
        let z = u[(i, j)];
        Complex64::new(z.re, z.im)
    });
    (vals, vecs)
}
