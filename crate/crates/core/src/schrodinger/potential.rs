//! Potentials assembled from shear profile families.

use crate::error::{Error, Result};
use crate::numerics::TorusGrid;
use crate::profiles::ProfileFamily;

/// A real potential sampled on a torus grid.
///
/// For the 2D two-point potential V(y,y′) = Σ_j (u_j(y) − u_j(y′))² the
/// diagonal vanishes exactly and symmetry holds exactly, because both
/// follow from evaluating identical floating-point expressions.
#[derive(Debug, Clone)]
pub struct PotentialGrid {
    grid: TorusGrid,
    values: Vec<f64>,
    provenance: String,
}

impl PotentialGrid {
    /// Wraps sampled values, enforcing finiteness and nonnegativity up to
    /// the roundoff allowance −10⁻¹⁴·max V.
    pub fn new(grid: TorusGrid, values: Vec<f64>, provenance: String) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "potential has {} samples, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("potential contains non-finite values".into()));
        }
        let max = values.iter().cloned().fold(0.0, f64::max);
        if values.iter().any(|&v| v < -1e-14 * max) {
            return Err(Error::InvariantViolation(
                "potential is negative beyond roundoff".into(),
            ));
        }
        Ok(PotentialGrid { grid, values, provenance })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean_value(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// The two-point potential V(y,y′) = Σ_j (u_j(y) − u_j(y′))² on a 2D grid,
/// with y along rows.
pub fn assemble_potential_2d(
    family: &ProfileFamily,
    grid: TorusGrid,
) -> Result<PotentialGrid> {
    if grid.dim() != 2 {
        return Err(Error::GridMismatch("two-point potential needs a 2D grid".into()));
    }
    let n = grid.n();
    let samples: Vec<Vec<f64>> = family
        .profiles()
        .iter()
        .map(|u| (0..n).map(|i| u.eval(grid.point(i))).collect())
        .collect();
    let mut values = vec![0.0; grid.len()];
    for i in 0..n {
        for j in 0..n {
            let mut v = 0.0;
            for s in &samples {
                let d = s[i] - s[j];
                v += d * d;
            }
            values[i * n + j] = v;
        }
    }
    PotentialGrid::new(
        grid,
        values,
        format!("two-point potential of a {}-profile family", family.profiles().len()),
    )
}

/// The pinned 1D potential V₀(y) = Σ_j (u_j(y) − u_j(y₀))².
pub fn assemble_potential_1d(
    family: &ProfileFamily,
    y0: f64,
    grid: TorusGrid,
) -> Result<PotentialGrid> {
    if grid.dim() != 1 {
        return Err(Error::GridMismatch("pinned potential needs a 1D grid".into()));
    }
    let pinned: Vec<f64> = family.profiles().iter().map(|u| u.eval(y0)).collect();
    let values: Vec<f64> = (0..grid.n())
        .map(|i| {
            let y = grid.point(i);
            family
                .profiles()
                .iter()
                .zip(&pinned)
                .map(|(u, p)| {
                    let d = u.eval(y) - p;
                    d * d
                })
                .sum()
        })
        .collect();
    PotentialGrid::new(grid, values, format!("pinned potential at y0 = {y0:.6}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ShearProfile;
    use std::f64::consts::PI;

    fn family(profiles: Vec<ShearProfile>) -> ProfileFamily {
        ProfileFamily::new(profiles).unwrap()
    }

    #[test]
    fn two_point_values_for_sin() {
        let fam = family(vec![ShearProfile::sin()]);
        let grid = TorusGrid::new(32, 2).unwrap();
        let v = assemble_potential_2d(&fam, grid).unwrap();
        let at = |y: f64, yp: f64| {
            let i = (y / grid.h()).round() as usize;
            let j = (yp / grid.h()).round() as usize;
            v.values()[i * 32 + j]
        };
        // (sin 0 − sin π)² = 0 off the diagonal, (sin 0 − sin π/2)² = 1.
        assert!(at(0.0, PI).abs() < 1e-28);
        assert!((at(0.0, PI / 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_values_for_sin_cos() {
        let fam = family(vec![ShearProfile::sin(), ShearProfile::cos()]);
        let grid = TorusGrid::new(32, 2).unwrap();
        let v = assemble_potential_2d(&fam, grid).unwrap();
        let i = 0;
        let j = 16; // y′ = π
        assert!((v.values()[i * 32 + j] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_diagonal_and_symmetry_are_exact() {
        let fam = family(vec![ShearProfile::sin_cubed(), ShearProfile::cos()]);
        let grid = TorusGrid::new(64, 2).unwrap();
        let v = assemble_potential_2d(&fam, grid).unwrap();
        for i in 0..64 {
            assert_eq!(v.values()[i * 64 + i], 0.0);
            for j in 0..i {
                assert_eq!(v.values()[i * 64 + j], v.values()[j * 64 + i]);
            }
        }
    }

    #[test]
    fn pinned_potential_vanishes_at_pin() {
        let fam = family(vec![ShearProfile::sin(), ShearProfile::cos()]);
        let grid = TorusGrid::new(128, 1).unwrap();
        let v = assemble_potential_1d(&fam, 0.0, grid).unwrap();
        assert_eq!(v.values()[0], 0.0);
        // sin²y + (cos y − 1)² = 2 − 2cos y, minimum only at y = 0.
        for (i, &val) in v.values().iter().enumerate() {
            let y = grid.point(i);
            assert!((val - (2.0 - 2.0 * y.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_potential_is_rejected() {
        let grid = TorusGrid::new(16, 1).unwrap();
        let mut values = vec![1.0; 16];
        values[3] = -1e-6;
        assert!(PotentialGrid::new(grid, values, "test".into()).is_err());
    }
}
