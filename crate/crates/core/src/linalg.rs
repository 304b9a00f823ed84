//! Thin dense Hermitian helpers over nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest absolute entry of `a - a†`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

fn is_real(a: &CMatrix) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Real symmetric input takes the real solver, which is roughly four times
/// cheaper than the complex one; the eigenvectors are promoted afterwards.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let (values, vectors) = if is_real(a) {
        let re = a.map(|z| z.re);
        let eig = SymmetricEigen::new(re);
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(a.clone());
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            eig.eigenvectors,
        )
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending. Closed form for 2x2.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    match a.nrows() {
        0 => Vec::new(),
        1 => vec![a[(0, 0)].re],
        2 => {
            let p = a[(0, 0)].re;
            let q = a[(1, 1)].re;
            let off = 0.5 * (a[(0, 1)] + a[(1, 0)].conj());
            let mean = 0.5 * (p + q);
            let radius = (0.25 * (p - q) * (p - q) + off.norm_sqr()).sqrt();
            vec![mean - radius, mean + radius]
        }
        _ => {
            let mut v: Vec<f64> = if is_real(a) {
                SymmetricEigen::new(a.map(|z| z.re)).eigenvalues.iter().copied().collect()
            } else {
                a.clone().symmetric_eigenvalues().iter().copied().collect()
            };
            v.sort_by(f64::total_cmp);
            v
        }
    }
}

pub fn trace(a: &CMatrix) -> C64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// `|v><v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).iter().map(|x| x.abs()).sum()
}
