//! Quasimodes certifying the mixing exponent from below.
//!
//! The scaling sweeps in [`crate::schrodinger`] measure how fast
//! μ_min(−∂²_y + λ²V₀) grows in the coupling λ; this module pins the
//! matching upper bound. Near a pinned overlapping critical point y₀ of
//! order n₀ the potential V₀(y) = Σ_j (u_j(y) − u_j(y₀))² opens like
//! c·(y − y₀)^{2n₀+2} with c = Σ_j c_j² over the leading coefficients of
//! the profiles, so the rescaled model operator
//!
//! > H = −∂²_y + c·y^{2n₀+2}   on L²(ℝ)
//!
//! captures the bottom of the spectrum. With p its ground state and
//! μ₀ its ground energy, the self-similar trial function
//!
//! > q^λ(y) = χ(λ^β (y − y₀)) · p(λ^{1/(n₀+2)} (y − y₀)) / ‖·‖_{L²(𝕋)}
//!
//! lives on the torus and obeys the sandwich
//!
//! > μ_min(−∂² + λ²V₀) ≤ R(q^λ) ≤ C λ^{2/(n₀+2)},
//!
//! so the Rayleigh quotient R(q) = ‖q′‖² + λ²∫V₀|q|² certifies that the
//! measured exponent 2/(n₀+2) is sharp rather than an artifact of the
//! eigensolver. The smooth cutoff χ equals 1 on |s| ≤ 4π/5 and vanishes
//! for |s| ≥ 8π/9, keeping the support inside one period. Its rate β
//! must balance two error terms: the cutoff commutator stays subdominant
//! only for β < 1/(n₀+2), while the potential seen on the plateau stays
//! subdominant only for β > (2n₀+2)/((n₀+2)(2n₀+3)). Any β strictly
//! inside that window works; the default sits at the midpoint.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lobpcg_smallest_from, Dst1, LinearOp, LobpcgOptions, SymTridiag};
use crate::numerics::{h1_seminorm, l2_norm, FftCache, Field, TorusGrid};
use crate::profiles::{circular_distance, ProfileFamily};
use crate::schrodinger::{assemble_potential_1d, recommended_grid, PotentialGrid};

/// Inner edge of the cutoff: χ ≡ 1 on |s| ≤ 4π/5.
const PLATEAU: f64 = 4.0 * PI / 5.0;
/// Outer edge of the cutoff: χ ≡ 0 for |s| ≥ 8π/9.
const SUPPORT: f64 = 8.0 * PI / 9.0;
/// Ground-state mass allowed in the outer 10% of the solve interval.
const BOUNDARY_TOL: f64 = 1e-6;
/// Matching tolerance between y₀ and the family's critical points.
const TOL_MATCH: f64 = 1e-6;

/// Ground state of the model operator −∂²_y + c·y^{2n₀+2} on an interval
/// [−R, R] with Dirichlet walls wide enough that the walls are invisible.
#[derive(Debug, Clone)]
pub struct AnharmonicGroundState {
    /// Half-width R of the solve interval.
    pub half_width: f64,
    /// Number of interior grid nodes.
    pub grid_n: usize,
    /// Ground energy μ₀ > 0.
    pub mu0: f64,
    /// Ground state on the interior nodes, positive, ‖p‖_{L²(ℝ)} = 1.
    pub values: Vec<f64>,
    /// Critical-point order n₀ of the well y^{2n₀+2}.
    pub n0: usize,
    /// Well coefficient c.
    pub coeff: f64,
    /// L² mass fraction of p in the outer 10% of [−R, R].
    pub boundary_mass: f64,
    /// Sine-series coefficients of p, for off-grid evaluation.
    sine_coeffs: Vec<f64>,
}

impl AnharmonicGroundState {
    /// Evaluates p at an arbitrary point by its sine series; zero beyond
    /// the solve interval, where the boundary-mass invariant caps the
    /// discarded tail at 10⁻⁶ in norm.
    pub fn evaluate(&self, y: f64) -> f64 {
        if y.abs() >= self.half_width {
            return 0.0;
        }
        let theta = PI * (y + self.half_width) / (2.0 * self.half_width);
        // sin((p+1)θ) by the Chebyshev three-term recurrence.
        let (sin1, cos1) = theta.sin_cos();
        let two_cos = 2.0 * cos1;
        let mut prev = 0.0;
        let mut cur = sin1;
        let mut acc = 0.0;
        for &b in &self.sine_coeffs {
            acc += b * cur;
            let next = two_cos * cur - prev;
            prev = cur;
            cur = next;
        }
        acc
    }
}

/// The open window of admissible cutoff rates β for overlap order n₀.
pub fn beta_interval(n0: usize) -> (f64, f64) {
    let n = n0 as f64;
    (
        (2.0 * n + 2.0) / ((n + 2.0) * (2.0 * n + 3.0)),
        1.0 / (n + 2.0),
    )
}

/// Midpoint of [`beta_interval`], the default cutoff rate.
pub fn default_beta(n0: usize) -> f64 {
    let (lo, hi) = beta_interval(n0);
    0.5 * (lo + hi)
}

/// C^∞ cutoff built from exp(−1/t): 1 on [−plateau, plateau], 0 outside
/// (−support, support), strictly monotone between.
fn bump(s: f64, plateau: f64, support: f64) -> f64 {
    let a = s.abs();
    if a <= plateau {
        return 1.0;
    }
    if a >= support {
        return 0.0;
    }
    let t = (a - plateau) / (support - plateau);
    let rise = (-1.0 / (1.0 - t)).exp();
    let fall = (-1.0 / t).exp();
    rise / (rise + fall)
}

/// −∂² + V on (−R, R) with Dirichlet walls, applied in the sine basis
/// that diagonalizes the Laplacian exactly.
struct Anharmonic1d {
    mode_eigs: Vec<f64>,
    potential: Vec<f64>,
    dst: Dst1,
}

impl Anharmonic1d {
    fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let mut modes = self.dst.forward(x);
        for (m, e) in modes.iter_mut().zip(&self.mode_eigs) {
            *m *= e;
        }
        let mut out = self.dst.inverse(&modes);
        for ((o, &v), &xi) in out.iter_mut().zip(&self.potential).zip(x) {
            *o += v * xi;
        }
        out
    }
}

impl LinearOp for Anharmonic1d {
    fn dim(&self) -> usize {
        self.potential.len()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let hre = self.apply_real(&re);
        let him = self.apply_real(&im);
        for (yi, (r, i)) in y.iter_mut().zip(hre.into_iter().zip(him)) {
            *yi = Complex64::new(r, i);
        }
    }
}

/// Exact inverse of the finite-difference analog of the same operator;
/// the symbol mismatch to the sine-spectral Laplacian is bounded by
/// π²/4, so the preconditioned iteration converges in O(1) sweeps.
struct TridiagPrecond {
    size: usize,
    factor: SymTridiag,
}

impl LinearOp for TridiagPrecond {
    fn dim(&self) -> usize {
        self.size
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let sre = self.factor.solve_shifted(0.0, &re);
        let sim = self.factor.solve_shifted(0.0, &im);
        for (yi, (r, i)) in y.iter_mut().zip(sre.into_iter().zip(sim)) {
            *yi = Complex64::new(r, i);
        }
    }
}

fn solve_well(n0: usize, coeff: f64, r: f64, n: usize) -> Result<(f64, Vec<f64>, f64)> {
    let h = 2.0 * r / (n as f64 + 1.0);
    let power = 2 * n0 as i32 + 2;
    let potential: Vec<f64> = (0..n)
        .map(|i| {
            let y = -r + (i as f64 + 1.0) * h;
            coeff * y.powi(power)
        })
        .collect();
    let mode_eigs: Vec<f64> = (0..n)
        .map(|p| {
            let k = (p as f64 + 1.0) * PI / (2.0 * r);
            k * k
        })
        .collect();
    let scale = coeff * r.powi(power) + mode_eigs[n - 1];

    let w = 1.0 / (h * h);
    let factor = SymTridiag::new(
        potential.iter().map(|v| 2.0 * w + v).collect(),
        vec![-w; n - 1],
    )?;
    let op = Anharmonic1d { mode_eigs, potential, dst: Dst1::new() };
    let precond = TridiagPrecond { size: n, factor };
    let opts = LobpcgOptions {
        nev: 1,
        block: 3,
        tol: 1e-9 * scale,
        max_iter: 400,
        seed: 0xa41d,
    };
    let res = lobpcg_smallest_from(&op, Some(&precond), &[], &[], &opts)?;
    let mu = res.eigenvalues[0];
    if mu <= 0.0 {
        return Err(Error::InvariantViolation(format!(
            "anharmonic ground energy must be positive, got {mu:.3e}"
        )));
    }

    // Rotate the converged complex vector onto the real axis.
    let vec = &res.eigenvectors[0];
    let lead = vec
        .iter()
        .cloned()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap();
    let phase = lead.conj() / lead.norm();
    let mut values: Vec<f64> = vec.iter().map(|z| (z * phase).re).collect();

    let mass: f64 = values.iter().map(|v| v * v).sum::<f64>() * h;
    let inv = 1.0 / mass.sqrt();
    for v in &mut values {
        *v *= inv;
    }
    if values.iter().sum::<f64>() < 0.0 {
        for v in &mut values {
            *v = -*v;
        }
    }
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if values.iter().any(|&v| v < -1e-6 * peak) {
        return Err(Error::InvariantViolation(
            "anharmonic ground state changed sign; it must be nodeless".into(),
        ));
    }

    let boundary_mass: f64 = values
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let y = -r + (*i as f64 + 1.0) * h;
            y.abs() > 0.9 * r
        })
        .map(|(_, v)| v * v)
        .sum::<f64>()
        * h;
    Ok((mu, values, boundary_mass))
}

/// Solves for the ground state of −∂² + c·y^{2n₀+2} on [−R, R] with
/// Dirichlet walls. The half-width doubles (up to three times) until the
/// outer 10% of the interval carries less than 10⁻⁶ of the norm, so the
/// artificial walls cannot bias μ₀.
pub fn anharmonic_ground(
    n0: usize,
    coeff: f64,
    half_width: f64,
    grid_n: usize,
) -> Result<AnharmonicGroundState> {
    if !coeff.is_finite() || coeff <= 0.0 {
        return Err(Error::Config(format!(
            "well coefficient must be positive and finite, got {coeff}"
        )));
    }
    if !half_width.is_finite() || half_width <= 0.0 {
        return Err(Error::Config(format!(
            "interval half-width must be positive and finite, got {half_width}"
        )));
    }
    if grid_n < 512 {
        return Err(Error::Config(format!(
            "anharmonic solve needs at least 512 interior nodes, got {grid_n}"
        )));
    }
    if n0 > 8 {
        return Err(Error::UnsupportedSize(format!(
            "well exponent 2·{n0}+2 overflows double precision on wide intervals"
        )));
    }

    let mut r = half_width;
    let mut last_mass = f64::INFINITY;
    for doubling in 0..=3 {
        let (mu, values, boundary_mass) = solve_well(n0, coeff, r, grid_n)?;
        if boundary_mass.sqrt() < BOUNDARY_TOL {
            let dst = Dst1::new();
            let scale = 2.0 / (grid_n as f64 + 1.0);
            let sine_coeffs: Vec<f64> =
                dst.forward(&values).into_iter().map(|b| b * scale).collect();
            return Ok(AnharmonicGroundState {
                half_width: r,
                grid_n,
                mu0: mu,
                values,
                n0,
                coeff,
                boundary_mass,
                sine_coeffs,
            });
        }
        last_mass = boundary_mass;
        if doubling < 3 {
            r *= 2.0;
        }
    }
    Err(Error::Config(format!(
        "ground state still leaks mass {last_mass:.3e} into the outer 10% of \
         [−{r}, {r}] after 3 doublings of the half-width; start from a wider interval"
    )))
}

fn pinned_structure(family: &ProfileFamily, y0: f64) -> Result<(usize, f64)> {
    let mut hits = Vec::new();
    for (j, pts) in family.critical_points().iter().enumerate() {
        match pts.iter().find(|p| circular_distance(p.y, y0) <= TOL_MATCH) {
            Some(p) => hits.push(*p),
            None => {
                return Err(Error::Config(format!(
                    "profile {j} has no critical point at y0 = {y0:.6}; the pin \
                     must be an overlapping critical point of the family"
                )))
            }
        }
    }
    let n0 = hits.iter().map(|p| p.order).min().unwrap();
    let coeff: f64 = hits
        .iter()
        .filter(|p| p.order == n0)
        .map(|p| p.leading_coeff * p.leading_coeff)
        .sum();
    Ok((n0, coeff))
}

/// Builds the normalized trial function q^λ on the 1D torus grid sized by
/// [`recommended_grid`], cut off by χ(λ^β(y−y₀)) and carrying the
/// rescaled ground state p(λ^{1/(n₀+2)}(y−y₀)).
pub fn build_quasimode(
    gs: &AnharmonicGroundState,
    lambda: f64,
    beta: f64,
    family: &ProfileFamily,
    y0: f64,
) -> Result<Field> {
    build_quasimode_shaped(gs, lambda, beta, family, y0, PLATEAU, SUPPORT)
}

pub(crate) fn build_quasimode_shaped(
    gs: &AnharmonicGroundState,
    lambda: f64,
    beta: f64,
    family: &ProfileFamily,
    y0: f64,
    plateau: f64,
    support: f64,
) -> Result<Field> {
    if !lambda.is_finite() || lambda < 1.0 {
        return Err(Error::Config(format!(
            "quasimode coupling must satisfy lambda >= 1, got {lambda}"
        )));
    }
    let (lo, hi) = beta_interval(gs.n0);
    if !beta.is_finite() || beta <= lo || beta >= hi {
        return Err(Error::Config(format!(
            "beta = {beta:.6} lies outside the admissible open interval \
             ({lo:.6}, {hi:.6}) for overlap order n0 = {}",
            gs.n0
        )));
    }
    let (n0_here, coeff_here) = pinned_structure(family, y0)?;
    if n0_here != gs.n0 {
        return Err(Error::Config(format!(
            "ground state was solved for overlap order {}, but the family pins \
             order {n0_here} at y0 = {y0:.6}",
            gs.n0
        )));
    }
    if (coeff_here - gs.coeff).abs() > 1e-6 * coeff_here.max(1.0) {
        return Err(Error::Config(format!(
            "ground state well coefficient {:.6e} does not match the family's \
             {coeff_here:.6e} at y0 = {y0:.6}",
            gs.coeff
        )));
    }

    let n = recommended_grid(lambda);
    let grid = TorusGrid::new(n, 1)?;
    let cut_rate = lambda.powf(beta);
    let core_rate = lambda.powf(1.0 / (gs.n0 as f64 + 2.0));
    let mut field = Field::from_fn_1d(grid, |y| {
        let mut d = (y - y0).rem_euclid(2.0 * PI);
        if d > PI {
            d -= 2.0 * PI;
        }
        let chi = bump(cut_rate * d, plateau, support);
        if chi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(chi * gs.evaluate(core_rate * d), 0.0)
    });
    let norm = l2_norm(&field);
    if norm < 1e-300 {
        return Err(Error::Degenerate(
            "quasimode vanished identically; cutoff and ground state supports \
             do not overlap"
                .into(),
        ));
    }
    field.scale(1.0 / norm);
    Ok(field)
}

/// Rayleigh quotient R(q) = ‖q′‖² + λ²∫V₀|q|² of a normalized field
/// against the pinned potential of the family at y₀.
pub fn rayleigh(q: &Field, family: &ProfileFamily, y0: f64, lambda: f64) -> Result<f64> {
    if q.grid().dim() != 1 {
        return Err(Error::GridMismatch("Rayleigh quotient needs a 1D field".into()));
    }
    let potential = assemble_potential_1d(family, y0, q.grid())?;
    rayleigh_with_potential(q, &potential, lambda)
}

fn rayleigh_with_potential(q: &Field, potential: &PotentialGrid, lambda: f64) -> Result<f64> {
    let norm = l2_norm(q);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Config(format!(
            "Rayleigh quotient expects a unit-norm field, got ‖q‖ = {norm:.12}"
        )));
    }
    let grad = h1_seminorm(q, &FftCache::new());
    let w = q.grid().quad_weight();
    let pot: f64 = potential
        .values()
        .iter()
        .zip(q.data())
        .map(|(v, z)| v * z.norm_sqr())
        .sum::<f64>()
        * w;
    Ok(grad * grad + lambda * lambda * pot)
}

/// One coupling in a quasimode sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasimodePoint {
    pub lambda: f64,
    /// Rayleigh quotient R(q^λ).
    pub rayleigh: f64,
    /// R(q^λ) / λ^{2/(n₀+2)}; bounded iff the upper bound is sharp.
    pub ratio: f64,
}

/// Sweep of Rayleigh quotients R(q^λ) over couplings, demonstrating the
/// λ^{2/(n₀+2)} upper bound with the plateau of `ratio` values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasimodeReport {
    /// Cutoff rate used for every point.
    pub beta: f64,
    /// Admissible open window for β at this overlap order.
    pub interval: (f64, f64),
    pub points: Vec<QuasimodePoint>,
}

/// Runs the full upper-bound sweep at a pinned critical point: solves the
/// model well once, then evaluates R(q^λ) for each coupling. `beta`
/// defaults to the midpoint of the admissible window.
pub fn quasimode_report(
    family: &ProfileFamily,
    y0: f64,
    lambdas: &[f64],
    beta: Option<f64>,
) -> Result<QuasimodeReport> {
    if lambdas.is_empty() {
        return Err(Error::Config("quasimode sweep needs at least one coupling".into()));
    }
    let (n0, coeff) = pinned_structure(family, y0)?;
    let beta = beta.unwrap_or_else(|| default_beta(n0));
    // Width of the well ground state scales like c^{−1/(2n₀+4)}.
    let width = coeff.powf(-1.0 / (2.0 * n0 as f64 + 4.0));
    let gs = anharmonic_ground(n0, coeff, (8.0 * width).max(4.0), 2048)?;
    let exponent = 2.0 / (n0 as f64 + 2.0);
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let q = build_quasimode(&gs, lambda, beta, family, y0)?;
        let r = rayleigh(&q, family, y0, lambda)?;
        points.push(QuasimodePoint { lambda, rayleigh: r, ratio: r / lambda.powf(exponent) });
    }
    Ok(QuasimodeReport { beta, interval: beta_interval(n0), points })
}
