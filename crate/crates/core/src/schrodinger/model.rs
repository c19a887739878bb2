//! Model problems −Δ + λ²(xᵐ ± yⁿ)² on the Dirichlet box [−R,R]².
//!
//! The plane problem is truncated to a box; Dirichlet truncation only
//! raises eigenvalues, so lower-bound checks stay valid. The Laplacian is
//! sine-spectral: DST-I in each coordinate diagonalizes it with
//! eigenvalues (pπ/(2R))² + (qπ/(2R))².

use crate::error::{Error, Result};
use crate::linalg::{
    dense_symmetric_smallest, lobpcg_smallest_from, Dst1, FdCholesky, LinearOp, LobpcgOptions,
};
use crate::schrodinger::scaling::{log_log_fit, ScalingFit, ScalingPoint};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Sign of the cross term in (xᵐ ± yⁿ)².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelSign {
    Plus,
    Minus,
}

impl ModelSign {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            ModelSign::Plus => a + b,
            ModelSign::Minus => a - b,
        }
    }
}

/// Fraction of the side length 2R counted as the boundary strip.
const BOUNDARY_STRIP: f64 = 0.01;
/// A sine tail along a zero curve that spans the box leaves ~10⁻⁶ of its
/// mass in the strip; mass above this level means the walls, not the
/// potential, confine the state.
const BOUNDARY_MASS_WARN: f64 = 1e-4;

/// Smallest Dirichlet eigenpair of a box model problem.
#[derive(Debug, Clone)]
pub struct DirichletEigenResult {
    pub mu: f64,
    /// Ground state on the interior grid, row-major in (x, y), normalized
    /// to quadrature L² norm 1.
    pub eigenvector: Vec<f64>,
    /// Fraction of |ψ|² within 0.01·(2R) of the boundary.
    pub boundary_mass: f64,
    pub grid_n: usize,
    pub lambda: f64,
    pub residual: f64,
    pub warnings: Vec<String>,
}

struct BoxOperator {
    n: usize,
    half_width: f64,
    /// λ²(xᵐ ± yⁿ)² at the interior points, row-major in (x, y).
    potential: Vec<f64>,
    dst: Dst1,
}

impl BoxOperator {
    /// Interior coordinates x_i = −R + (i+1)h with h = 2R/(N+1).
    fn coordinate(n: usize, half_width: f64, i: usize) -> f64 {
        let h = 2.0 * half_width / (n as f64 + 1.0);
        -half_width + (i as f64 + 1.0) * h
    }

    fn mode_eigenvalue(&self, p: usize, q: usize) -> f64 {
        let base = PI / (2.0 * self.half_width);
        let kp = (p as f64 + 1.0) * base;
        let kq = (q as f64 + 1.0) * base;
        kp * kp + kq * kq
    }

    /// Forward DST-I along both coordinates (unnormalized).
    fn sine_modes(&self, x: &[f64]) -> Vec<f64> {
        dst2_forward(x, self.n, &self.dst)
    }

    fn from_sine_modes(&self, c: &[f64]) -> Vec<f64> {
        let scale = 2.0 / (self.n as f64 + 1.0);
        let mut out = self.sine_modes(c);
        let s2 = scale * scale;
        for v in &mut out {
            *v *= s2;
        }
        out
    }

    fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let mut modes = self.sine_modes(x);
        let n = self.n;
        for p in 0..n {
            for q in 0..n {
                modes[p * n + q] *= self.mode_eigenvalue(p, q);
            }
        }
        let mut out = self.from_sine_modes(&modes);
        for ((o, &v), &xi) in out.iter_mut().zip(&self.potential).zip(x) {
            *o += v * xi;
        }
        out
    }

    fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        let d = self.n * self.n;
        if d > 4096 {
            return Err(Error::UnsupportedSize(format!(
                "dense representation limited to 4096 unknowns, grid has {d}"
            )));
        }
        let mut m = DMatrix::<f64>::zeros(d, d);
        let mut unit = vec![0.0; d];
        for j in 0..d {
            unit[j] = 1.0;
            let col = self.apply_real(&unit);
            for i in 0..d {
                m[(i, j)] = col[i];
            }
            unit[j] = 0.0;
        }
        let mt = m.transpose();
        Ok((m + mt) * 0.5)
    }
}

impl LinearOp for BoxOperator {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let are = self.apply_real(&re);
        let aim = self.apply_real(&im);
        for (o, (a, b)) in y.iter_mut().zip(are.into_iter().zip(aim)) {
            *o = Complex64::new(a, b);
        }
    }
}

/// Unnormalized DST-I along both coordinates of an n×n array.
fn dst2_forward(x: &[f64], n: usize, dst: &Dst1) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let row = dst.forward(&x[i * n..(i + 1) * n]);
        out[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = out[i * n + j];
        }
        let t = dst.forward(&col);
        for i in 0..n {
            out[i * n + j] = t[i];
        }
    }
    out
}

/// Sine-series interpolation of interior values onto a finer interior
/// grid of the same box: the DST-I expansion of the coarse data is
/// evaluated on the fine nodes.
fn upsample_interior(values: &[f64], n: usize, fine_n: usize, dst: &Dst1) -> Vec<f64> {
    let mut modes = dst2_forward(values, n, dst);
    let norm = (2.0 / (n as f64 + 1.0)).powi(2);
    for v in &mut modes {
        *v *= norm;
    }
    let mut fine_modes = vec![0.0; fine_n * fine_n];
    for p in 0..n {
        fine_modes[p * fine_n..p * fine_n + n].copy_from_slice(&modes[p * n..(p + 1) * n]);
    }
    dst2_forward(&fine_modes, fine_n, dst)
}

fn build_operator(
    m: u32,
    n_pow: u32,
    sign: ModelSign,
    lambda: f64,
    half_width: f64,
    grid_n: usize,
) -> Result<BoxOperator> {
    if m == 0 || n_pow == 0 {
        return Err(Error::Config(format!(
            "model exponents must be ≥ 1, got ({m}, {n_pow})"
        )));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::Config(format!("box half-width {half_width} must be positive")));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Config(format!("coupling λ = {lambda} must be ≥ 0")));
    }
    if grid_n < 15 {
        return Err(Error::Config(format!("box grid N = {grid_n} is too small")));
    }
    let mut potential = vec![0.0; grid_n * grid_n];
    let ls = lambda * lambda;
    for i in 0..grid_n {
        let x = BoxOperator::coordinate(grid_n, half_width, i);
        let xm = x.powi(m as i32);
        for j in 0..grid_n {
            let y = BoxOperator::coordinate(grid_n, half_width, j);
            let w = sign.combine(xm, y.powi(n_pow as i32));
            potential[i * grid_n + j] = ls * w * w;
        }
    }
    Ok(BoxOperator { n: grid_n, half_width, potential, dst: Dst1::new() })
}

/// Smallest eigenvalue of −Δ + λ²(xᵐ ± yⁿ)² on the Dirichlet box
/// [−R,R]² with an N×N interior sine-spectral grid. Lengths with
/// N + 1 a power of two keep the sine transforms on power-of-two FFTs.
/// `tol` defaults to 10⁻⁶ of the operator scale.
pub fn model_problem_eig(
    m: u32,
    n_pow: u32,
    sign: ModelSign,
    lambda: f64,
    half_width: f64,
    grid_n: usize,
    tol: Option<f64>,
) -> Result<DirichletEigenResult> {
    model_problem_eig_guided(m, n_pow, sign, lambda, half_width, grid_n, tol, None)
}

#[allow(clippy::too_many_arguments)]
fn model_problem_eig_guided(
    m: u32,
    n_pow: u32,
    sign: ModelSign,
    lambda: f64,
    half_width: f64,
    grid_n: usize,
    tol: Option<f64>,
    initial: Option<&[f64]>,
) -> Result<DirichletEigenResult> {
    let op = build_operator(m, n_pow, sign, lambda, half_width, grid_n)?;
    let max_v = op.potential.iter().cloned().fold(0.0, f64::max);
    let kinetic_top = 2.0 * ((grid_n as f64 + 1.0) * PI / (2.0 * half_width)).powi(2);
    let tol = tol.unwrap_or(1e-6 * (max_v + kinetic_top));
    let scale = max_v + kinetic_top;
    let spacing = 2.0 * half_width / (grid_n as f64 + 1.0);
    let shift = 1e-6 * scale;
    let diag: Vec<f64> = op.potential.iter().map(|v| v + shift).collect();
    let precond = FdCholesky::dirichlet(grid_n, spacing, &diag)?;
    // Zero curves that span the box drag a ladder of closely spaced
    // free-direction modes below the ground gap; a block of 8 keeps the
    // Rayleigh–Ritz space wide enough to sweep that ladder out.
    let opts = LobpcgOptions { nev: 1, block: 8, tol, max_iter: 800, seed: 0xb0c5 };
    let guess: Vec<Vec<Complex64>> = match initial {
        Some(g) => {
            if g.len() != grid_n * grid_n {
                return Err(Error::GridMismatch(format!(
                    "initial guess length {} does not match {grid_n}×{grid_n}",
                    g.len()
                )));
            }
            vec![g.iter().map(|&x| Complex64::new(x, 0.0)).collect()]
        }
        None => vec![],
    };
    let res = lobpcg_smallest_from(&op, Some(&precond), &[], &guess, &opts)?;
    let mu = res.eigenvalues[0];
    if mu < -1e-8 * scale {
        return Err(Error::InvariantViolation(format!(
            "box eigenvalue {mu:.6e} is negative beyond roundoff for a \
             nonnegative potential"
        )));
    }
    let vec = &res.eigenvectors[0];
    let h = 2.0 * half_width / (grid_n as f64 + 1.0);
    let strip = BOUNDARY_STRIP * 2.0 * half_width;
    let mut total = 0.0;
    let mut near = 0.0;
    for i in 0..grid_n {
        let dx = half_width - BoxOperator::coordinate(grid_n, half_width, i).abs();
        for j in 0..grid_n {
            let dy = half_width - BoxOperator::coordinate(grid_n, half_width, j).abs();
            let w = vec[i * grid_n + j].norm_sqr();
            total += w;
            if dx <= strip || dy <= strip {
                near += w;
            }
        }
    }
    let boundary_mass = near / total;
    let mut warnings = Vec::new();
    if boundary_mass > BOUNDARY_MASS_WARN {
        warnings.push(format!(
            "box may be too small: boundary strip holds {boundary_mass:.3e} of the mass"
        ));
    }
    let norm = (total * h * h).sqrt();
    let eigenvector: Vec<f64> = vec.iter().map(|z| z.re / norm).collect();
    Ok(DirichletEigenResult {
        mu,
        eigenvector,
        boundary_mass,
        grid_n,
        lambda,
        residual: res.residuals[0],
        warnings,
    })
}

/// Dense-oracle variant for small grids; no iterative machinery.
pub fn model_problem_eig_dense(
    m: u32,
    n_pow: u32,
    sign: ModelSign,
    lambda: f64,
    half_width: f64,
    grid_n: usize,
) -> Result<f64> {
    let op = build_operator(m, n_pow, sign, lambda, half_width, grid_n)?;
    let dense = op.dense_matrix()?;
    Ok(dense_symmetric_smallest(&dense).0)
}

/// Interior grid size for a box study: N + 1 a power of two, with about
/// ten points per semiclassical width λ^{−1/2} at half-width R.
pub fn recommended_box_grid(lambda: f64, half_width: f64) -> usize {
    let target = (10.0 * half_width * lambda.max(1.0).sqrt()).ceil() as usize;
    128usize.max(target.next_power_of_two()) - 1
}

/// Sweeps the box model problem over `lambdas` and fits the growth
/// exponent of μ(λ), with the same grid-doubling certification as the
/// torus study. The target exponent is 2n/(2n + nm − m).
pub fn model_scaling_study(
    m: u32,
    n_pow: u32,
    sign: ModelSign,
    lambdas: &[f64],
    half_width: f64,
) -> Result<ScalingFit> {
    model_scaling_study_with(m, n_pow, sign, lambdas, half_width, None)
}

/// [`model_scaling_study`] with an explicit base grid instead of the
/// grid rule, for fast checks on modest couplings.
pub fn model_scaling_study_with(
    m: u32,
    n_pow: u32,
    sign: ModelSign,
    lambdas: &[f64],
    half_width: f64,
    base_n: Option<usize>,
) -> Result<ScalingFit> {
    if lambdas.len() < 5 {
        return Err(Error::Config(format!(
            "scaling study needs at least 5 couplings, got {}",
            lambdas.len()
        )));
    }
    for pair in lambdas.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::Config(
                "scaling study couplings must be strictly increasing".into(),
            ));
        }
    }
    let first = lambdas[0];
    if !(first > 0.0) {
        return Err(Error::Config("scaling study couplings must be positive".into()));
    }
    if lambdas[lambdas.len() - 1] / first < 10.0 {
        return Err(Error::Config("scaling study couplings must span a decade".into()));
    }
    let nf = n_pow as f64;
    let mf = m as f64;
    let target = 2.0 * nf / (2.0 * nf + nf * mf - mf);
    let dst = Dst1::new();
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let n = base_n.unwrap_or_else(|| recommended_box_grid(lambda, half_width));
        let coarse = solve_box(m, n_pow, sign, lambda, half_width, n, None)?;
        let point = match coarse {
            None => ScalingPoint {
                lambda,
                mu: f64::NAN,
                grid_n: n,
                residual: f64::NAN,
                converged: false,
                richardson_shift: f64::NAN,
            },
            Some(res) => {
                let fine_n = 2 * (n + 1) - 1;
                let guess = upsample_interior(&res.eigenvector, n, fine_n, &dst);
                let fine =
                    solve_box(m, n_pow, sign, lambda, half_width, fine_n, Some(&guess))?;
                let (shift, converged) = match fine {
                    Some(f) => {
                        let s = (f.mu - res.mu).abs() / f.mu.abs().max(f64::MIN_POSITIVE);
                        (s, s < 0.01)
                    }
                    None => (f64::NAN, false),
                };
                ScalingPoint {
                    lambda,
                    mu: res.mu,
                    grid_n: n,
                    residual: res.residual,
                    converged,
                    richardson_shift: shift,
                }
            }
        };
        points.push(point);
    }
    let surviving: Vec<&ScalingPoint> = points.iter().filter(|p| p.converged).collect();
    if surviving.len() < 5 {
        return Err(Error::TooFewConverged { needed: 5, got: surviving.len() });
    }
    let xs: Vec<f64> = surviving.iter().map(|p| p.lambda).collect();
    let ys: Vec<f64> = surviving.iter().map(|p| p.mu).collect();
    let fit = log_log_fit(&xs, &ys)?;
    let mut band = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &surviving {
        let ratio = p.mu / p.lambda.powf(target);
        band.0 = band.0.min(ratio);
        band.1 = band.1.max(ratio);
    }
    Ok(ScalingFit {
        points,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        target,
        band,
    })
}

fn solve_box(
    m: u32,
    n_pow: u32,
    sign: ModelSign,
    lambda: f64,
    half_width: f64,
    grid_n: usize,
    initial: Option<&[f64]>,
) -> Result<Option<DirichletEigenResult>> {
    match model_problem_eig_guided(m, n_pow, sign, lambda, half_width, grid_n, None, initial) {
        Ok(res) => Ok(Some(res)),
        Err(Error::EigNoConvergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
