//! Uniform periodic grids on `[0, 2π)^d`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A uniform grid on the torus `[0, 2π)^d`, `d ∈ {1, 2}`, with the same
/// power-of-two point count `n` on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    dim: usize,
}

impl TorusGrid {
    /// Minimum admissible points per axis.
    pub const MIN_N: usize = 16;

    /// Builds a grid, validating that `n` is a power of two of at least
    /// [`Self::MIN_N`] and that `dim` is 1 or 2.
    pub fn new(n: usize, dim: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Config(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !n.is_power_of_two() || n < Self::MIN_N {
            return Err(Error::Config(format!(
                "grid size must be a power of two >= {}, got {n}",
                Self::MIN_N
            )));
        }
        Ok(TorusGrid { n, dim })
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spatial dimension (1 or 2).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid spacing `h = 2π/n`.
    pub fn h(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Total number of grid points `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// True when the grid holds no points (never, for a valid grid).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of index `i` on one axis.
    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// All axis coordinates.
    pub fn axis_points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Integer wavenumber of FFT bin `i`, in `{−n/2+1, …, n/2}`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wavenumber used by first-derivative multipliers: the Nyquist bin
    /// `k = n/2` is mapped to zero.
    pub fn wavenumber_deriv(&self, i: usize) -> i64 {
        let k = self.wavenumber(i);
        if i == self.n / 2 {
            0
        } else {
            k
        }
    }

    /// Quadrature weight `h^dim` for sums over all grid points.
    pub fn quad_weight(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }
}
