//! Semiclassical scaling studies: sweep the coupling λ across a decade,
//! certify each smallest eigenvalue by grid doubling, and fit the
//! exponent of μ^λ ~ λ^s against the overlap-order prediction
//! s = 2/(n₀+2).

use crate::error::{Error, Result};
use crate::linalg::SymTridiag;
use crate::numerics::{fourier_upsample, FftCache, Field, TorusGrid};
use crate::profiles::ProfileFamily;
use crate::schrodinger::operator::{recommended_grid, smallest_eigenvalue_guided};
use crate::schrodinger::potential::assemble_potential_2d;
use serde::{Deserialize, Serialize};

/// Least-squares fit of ln y against ln x.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits ln y = slope·ln x + intercept by ordinary least squares.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::Config(format!(
            "log-log fit needs matching lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Config(format!(
            "log-log fit needs at least 2 points, got {}",
            xs.len()
        )));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::Config(format!(
                "log-log fit needs positive finite data, got ({x}, {y})"
            )));
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitFailure(
            "log-log fit abscissae are all identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LogLogFit { slope, intercept, r_squared })
}

/// One coupling in a scaling sweep. `mu` is taken on the rule grid
/// `grid_n`; `richardson_shift` is the relative change after doubling the
/// grid, and the point only counts as `converged` when that shift is
/// below 1%.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub lambda: f64,
    pub mu: f64,
    pub grid_n: usize,
    pub residual: f64,
    pub converged: bool,
    pub richardson_shift: f64,
}

/// Result of a scaling sweep over a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Predicted exponent 2/(n₀+2) from the family's overlap order.
    pub target: f64,
    /// Range of μ^λ / λ^target over the surviving points; a bounded
    /// positive band is the lower-bound sanity check.
    pub band: (f64, f64),
}

const RICHARDSON_LIMIT: f64 = 0.01;

/// Sweeps μ^λ over `lambdas` on grids N(λ) = max(128, 2^⌈log₂ 16√λ⌉) and
/// fits the growth exponent. Couplings whose eigenvalue moves by ≥ 1%
/// under grid doubling, or whose solve stalls, are excluded from the fit
/// and flagged; fewer than 5 survivors is an error.
pub fn scaling_study(family: &ProfileFamily, lambdas: &[f64]) -> Result<ScalingFit> {
    scaling_study_with(family, lambdas, None)
}

/// [`scaling_study`] with an explicit base grid instead of the N(λ) rule,
/// for fast checks on modest couplings.
pub fn scaling_study_with(
    family: &ProfileFamily,
    lambdas: &[f64],
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
    let last = lambdas[lambdas.len() - 1];
    if !(first > 0.0) || !first.is_finite() || !last.is_finite() {
        return Err(Error::Config("scaling study couplings must be positive".into()));
    }
    if last / first < 10.0 {
        return Err(Error::Config(format!(
            "scaling study couplings must span a decade, got ratio {:.3}",
            last / first
        )));
    }
    let target = 2.0 / (family.overlap_order() as f64 + 2.0);

    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let n = base_n.unwrap_or_else(|| recommended_grid(lambda));
        points.push(certified_point(family, lambda, n)?);
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

fn certified_point(family: &ProfileFamily, lambda: f64, n: usize) -> Result<ScalingPoint> {
    let coarse = solve_on_grid(family, lambda, n, None)?;
    let (mu, residual, ground) = match coarse {
        Some(triple) => triple,
        None => {
            return Ok(ScalingPoint {
                lambda,
                mu: f64::NAN,
                grid_n: n,
                residual: f64::NAN,
                converged: false,
                richardson_shift: f64::NAN,
            })
        }
    };
    let guess = fourier_upsample(&ground, 2 * n, &FftCache::new())?;
    let fine = solve_on_grid(family, lambda, 2 * n, Some(&guess))?;
    let (shift, converged) = match fine {
        Some((mu_fine, _, _)) => {
            let shift = (mu_fine - mu).abs() / mu_fine.abs().max(f64::MIN_POSITIVE);
            (shift, shift < RICHARDSON_LIMIT)
        }
        None => (f64::NAN, false),
    };
    Ok(ScalingPoint { lambda, mu, grid_n: n, residual, converged, richardson_shift: shift })
}

/// Ok(None) marks a solver stall (the point is excluded and flagged);
/// configuration errors propagate.
fn solve_on_grid(
    family: &ProfileFamily,
    lambda: f64,
    n: usize,
    initial: Option<&Field>,
) -> Result<Option<(f64, f64, Field)>> {
    let grid = TorusGrid::new(n, 2)?;
    let potential = assemble_potential_2d(family, grid)?;
    match smallest_eigenvalue_guided(&potential, lambda, None, initial) {
        Ok(res) => Ok(Some((res.mu, res.residual, res.eigenvector))),
        Err(Error::EigNoConvergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Ground energy of −2∂²_u + 2λ²(1 − cos u) on the 2π-periodic circle.
///
/// For the family {sin y, cos y} the two-point potential is
/// V(y, y′) = 2 − 2cos(y − y′), a function of the relative coordinate
/// alone, and the torus ground state lies in the zero-total-momentum
/// sector, so μ^λ equals this reduced energy. In the Fourier basis the
/// reduced operator is symmetric tridiagonal (diagonal 2k² + 2λ²,
/// off-diagonal −λ²), solved here by Sturm bisection with no machinery
/// shared with the grid eigensolver.
pub fn separable_sin_cos_ground(lambda: f64) -> f64 {
    let k = (6.0 * lambda.abs().sqrt()).ceil() as i64 + 20;
    let diag: Vec<f64> =
        (-k..=k).map(|j| 2.0 * (j * j) as f64 + 2.0 * lambda * lambda).collect();
    let off = vec![-lambda * lambda; diag.len() - 1];
    SymTridiag::new(diag, off)
        .expect("shape is consistent by construction")
        .smallest_eigenvalue()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ShearProfile;
    use crate::schrodinger::operator::smallest_eigenvalue;

    fn sin_cos_family() -> ProfileFamily {
        ProfileFamily::new(vec![ShearProfile::sin(), ShearProfile::cos()]).unwrap()
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let xs = [2.0f64, 4.0, 8.0, 16.0, 32.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.8)).collect();
        let fit = log_log_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 0.8).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(log_log_fit(&[1.0], &[1.0]).is_err());
        assert!(log_log_fit(&[1.0, 2.0], &[1.0]).is_err());
        assert!(log_log_fit(&[1.0, -2.0], &[1.0, 1.0]).is_err());
        assert!(log_log_fit(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn study_validates_coupling_list() {
        let fam = sin_cos_family();
        let short = [1.0, 2.0, 4.0, 12.0];
        assert!(matches!(scaling_study(&fam, &short), Err(Error::Config(_))));
        let unordered = [1.0, 3.0, 2.0, 6.0, 12.0];
        assert!(matches!(scaling_study(&fam, &unordered), Err(Error::Config(_))));
        let narrow = [1.0, 1.5, 2.2, 3.3, 5.0];
        assert!(matches!(scaling_study(&fam, &narrow), Err(Error::Config(_))));
    }

    #[test]
    fn separable_oracle_has_harmonic_asymptotics() {
        // 2λ²(1 − cos u) ≈ λ²u² near the well, so μ ≈ √2·λ with a
        // negative quartic correction.
        let mu = separable_sin_cos_ground(200.0);
        let harmonic = 2.0f64.sqrt() * 200.0;
        assert!(mu < harmonic && mu > 0.97 * harmonic, "μ = {mu}");
    }

    #[test]
    fn grid_solver_matches_separable_oracle() {
        let fam = sin_cos_family();
        let grid = TorusGrid::new(64, 2).unwrap();
        let v = assemble_potential_2d(&fam, grid).unwrap();
        let res = smallest_eigenvalue(&v, 8.0, Some(1e-8)).unwrap();
        let oracle = separable_sin_cos_ground(8.0);
        assert!(
            (res.mu - oracle).abs() < 1e-7 * oracle,
            "grid {} vs oracle {}",
            res.mu,
            oracle
        );
    }

    #[test]
    fn sin_cos_sweep_fits_slope_near_one() {
        let fam = sin_cos_family();
        let lambdas = [2.5, 4.0, 6.3, 10.0, 16.0, 25.0];
        let fit = scaling_study_with(&fam, &lambdas, Some(64)).unwrap();
        assert!(fit.points.iter().all(|p| p.converged));
        assert!((fit.slope - 1.0).abs() < 0.12, "slope {}", fit.slope);
        assert!(fit.band.0 > 0.0 && fit.band.1.is_finite());
        assert_eq!(fit.target, 1.0);
        for p in &fit.points {
            let oracle = separable_sin_cos_ground(p.lambda);
            assert!((p.mu - oracle).abs() < 1e-4 * oracle);
        }
    }
}
