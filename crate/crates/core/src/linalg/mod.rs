//! Shared linear-algebra building blocks: a matrix-free preconditioned
//! block eigensolver for smallest eigenvalues, a sparse Cholesky
//! preconditioner built from the finite-difference analog, a symmetric
//! tridiagonal Sturm-bisection solver used as an independent oracle, the
//! type-I discrete sine transform for Dirichlet boxes, and dense
//! Hermitian helpers.

pub mod dense;
pub mod dst;
pub mod fdsolve;
pub mod lobpcg;
pub mod tridiag;

pub use dense::{dense_hermitian_eigs, dense_symmetric_smallest};
pub use dst::Dst1;
pub use fdsolve::FdCholesky;
pub use lobpcg::{
    lobpcg_smallest, lobpcg_smallest_from, LinearOp, LobpcgOptions, LobpcgResult,
};
pub use tridiag::SymTridiag;

use num_complex::Complex64;

/// Unweighted ℓ² inner product Σ conj(xᵢ) yᵢ.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Unweighted ℓ² norm.
pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
