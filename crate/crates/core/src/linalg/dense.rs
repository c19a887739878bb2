//! Dense Hermitian eigensolver wrappers used as oracles and as the
//! small-problem fallback.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// All eigenpairs of a Hermitian complex matrix, ascending.
pub fn dense_hermitian_eigs(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().cloned().collect())
        .collect();
    (values, vectors)
}

/// Smallest eigenpair of a real symmetric matrix.
pub fn dense_symmetric_smallest(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..m.nrows() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_eigs_of_pauli_like_matrix() {
        // [[1, i], [−i, 1]] has eigenvalues 0 and 2.
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let (vals, vecs) = dense_hermitian_eigs(&m);
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        // Residual check on the ground vector.
        let v = &vecs[0];
        let hv0 = m[(0, 0)] * v[0] + m[(0, 1)] * v[1];
        let hv1 = m[(1, 0)] * v[0] + m[(1, 1)] * v[1];
        assert!(hv0.norm() < 1e-12 && hv1.norm() < 1e-12);
    }

    #[test]
    fn symmetric_smallest_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 7.0]));
        let (val, vec) = dense_symmetric_smallest(&m);
        assert_eq!(val, -1.0);
        assert!((vec[1].abs() - 1.0).abs() < 1e-14);
    }
}
