//! Symmetric tridiagonal eigensolver by Sturm-sequence bisection and
//! inverse iteration.
//!
//! This is the independent oracle for the sine-spectral Dirichlet solvers:
//! a second-order finite-difference discretization of
//! −d²/dx² + potential is tridiagonal, and bisection on the Sturm count
//! involves no shared machinery with the spectral path.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and subdiagonal
/// `off` (length one less).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Config(format!(
                "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below x, by the Sturm sequence of
    /// leading-principal-minor sign agreements.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.dim();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let e2 = self.off[i - 1] * self.off[i - 1];
            let denom = if q != 0.0 { q } else { 1e-300 };
            q = self.diag[i] - x - e2 / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue by bisection inside the Gershgorin bound.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i < n - 1 {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Eigenvector for an eigenvalue approximation `mu` by inverse
    /// iteration, normalized to unit ℓ² norm.
    pub fn eigenvector(&self, mu: f64) -> Vec<f64> {
        let n = self.dim();
        // Shift slightly off the eigenvalue so the factorization stays
        // regular; inverse iteration still converges in a couple of steps.
        let scale = self
            .diag
            .iter()
            .map(|d| d.abs())
            .chain(self.off.iter().map(|e| e.abs()))
            .fold(1.0f64, f64::max);
        let sigma = mu - 1e-11 * scale;
        let mut v = vec![1.0; n];
        normalize(&mut v);
        for _ in 0..4 {
            v = self.solve_shifted(sigma, &v);
            normalize(&mut v);
        }
        if v[0] < 0.0 {
            for z in &mut v {
                *z = -*z;
            }
        }
        v
    }

    /// Solves (T − σI) x = b by LU with partial pivoting specialized to
    /// the tridiagonal band.
    pub(crate) fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        solve_tridiag_pivoted(&self.diag, &self.off, sigma, b)
    }
}

/// Banded LU with partial pivoting; the row swaps introduce one fill-in
/// superdiagonal.
fn solve_tridiag_pivoted(diag: &[f64], off: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut a = vec![0.0; n]; // subdiagonal (consumed)
    let mut d: Vec<f64> = diag.iter().map(|x| x - sigma).collect();
    let mut u = vec![0.0; n]; // first superdiagonal
    let mut w = vec![0.0; n]; // second superdiagonal (fill-in)
    let mut x = b.to_vec();
    for i in 0..n - 1 {
        a[i + 1] = off[i];
        u[i] = off[i];
    }
    for i in 0..n - 1 {
        if a[i + 1].abs() > d[i].abs() {
            // Swap rows i and i+1.
            let (ri0, ri1, ri2) = (d[i], u[i], w[i]);
            d[i] = a[i + 1];
            u[i] = d[i + 1];
            w[i] = u[i + 1];
            a[i + 1] = ri0;
            d[i + 1] = ri1;
            u[i + 1] = ri2;
            x.swap(i, i + 1);
        }
        let piv = if d[i] != 0.0 { d[i] } else { 1e-300 };
        let m = a[i + 1] / piv;
        d[i + 1] -= m * u[i];
        u[i + 1] -= m * w[i];
        x[i + 1] -= m * x[i];
    }
    // Back substitution on the 3-band upper triangle.
    for i in (0..n).rev() {
        let mut s = x[i];
        if i + 1 < n {
            s -= u[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= w[i] * x[i + 2];
        }
        let piv = if d[i] != 0.0 { d[i] } else { 1e-300 };
        x[i] = s / piv;
    }
    x
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fd_laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn sturm_count_on_known_spectrum() {
        // Eigenvalues of the FD Dirichlet Laplacian: 2 − 2cos(kπ/(n+1)).
        let n = 40;
        let t = fd_laplacian(n);
        let eig = |k: usize| 2.0 - 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos();
        assert_eq!(t.count_below(eig(1) - 1e-9), 0);
        assert_eq!(t.count_below(eig(1) + 1e-9), 1);
        assert_eq!(t.count_below(eig(5) + 1e-9), 5);
        assert_eq!(t.count_below(10.0), n);
    }

    #[test]
    fn smallest_eigenvalue_matches_closed_form() {
        for n in [16, 61, 200] {
            let t = fd_laplacian(n);
            let want = 2.0 - 2.0 * (PI / (n as f64 + 1.0)).cos();
            let got = t.smallest_eigenvalue();
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn eigenvector_is_discrete_sine() {
        let n = 50;
        let t = fd_laplacian(n);
        let mu = t.smallest_eigenvalue();
        let v = t.eigenvector(mu);
        let mut want: Vec<f64> =
            (1..=n).map(|j| (j as f64 * PI / (n as f64 + 1.0)).sin()).collect();
        normalize(&mut want);
        for (a, b) in v.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenvector_residual_is_small() {
        // A tridiagonal with varying diagonal (harmonic-oscillator-like).
        let n = 300;
        let h = 20.0 / n as f64;
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let xi = -10.0 + (i as f64 + 1.0) * h;
                2.0 / (h * h) + xi * xi
            })
            .collect();
        let t = SymTridiag::new(diag, vec![-1.0 / (h * h); n - 1]).unwrap();
        let mu = t.smallest_eigenvalue();
        // Ground state of −d²/dx² + x² is 1 (box truncation negligible).
        assert!((mu - 1.0).abs() < 1e-3, "harmonic ground {mu}");
        let v = t.eigenvector(mu);
        let mut res: f64 = 0.0;
        for i in 0..n {
            let mut hv = t.diag[i] * v[i];
            if i > 0 {
                hv += t.off[i - 1] * v[i - 1];
            }
            if i < n - 1 {
                hv += t.off[i] * v[i + 1];
            }
            res = res.max((hv - mu * v[i]).abs());
        }
        assert!(res < 1e-8 * (2.0 / (h * h)), "residual {res}");
    }
}
