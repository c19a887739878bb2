//! Complex scalar fields sampled on a [`TorusGrid`].

use super::grid::TorusGrid;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// A complex field stored row-major: in 2D, entry `(i, j)` lives at
/// `data[i * n + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: TorusGrid,
    data: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: TorusGrid) -> Self {
        Field { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Wraps existing data, checking the length against the grid.
    pub fn from_data(grid: TorusGrid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, data })
    }

    /// Samples `f(y)` on a 1D grid.
    pub fn from_fn_1d(grid: TorusGrid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        assert_eq!(grid.dim(), 1, "from_fn_1d needs a 1D grid");
        let data = (0..grid.n()).map(|i| f(grid.point(i))).collect();
        Field { grid, data }
    }

    /// Samples `f(x, y)` on a 2D grid, x along rows.
    pub fn from_fn_2d(grid: TorusGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        assert_eq!(grid.dim(), 2, "from_fn_2d needs a 2D grid");
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.point(i);
            for j in 0..n {
                data.push(f(x, grid.point(j)));
            }
        }
        Field { grid, data }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Entry at 2D position `(i, j)`.
    pub fn at_2d(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.grid.n() + j]
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Pointwise multiply by another field on the identical grid.
    pub fn mul_assign_pointwise(&mut self, other: &Field) {
        assert_eq!(self.grid, other.grid, "pointwise multiply on mismatched grids");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a *= *b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_data_checks_length() {
        let grid = TorusGrid::new(16, 1).unwrap();
        assert!(Field::from_data(grid, vec![Complex64::new(1.0, 0.0); 15]).is_err());
        assert!(Field::from_data(grid, vec![Complex64::new(1.0, 0.0); 16]).is_ok());
    }

    #[test]
    fn row_major_layout() {
        let grid = TorusGrid::new(16, 2).unwrap();
        let f = Field::from_fn_2d(grid, |x, y| Complex64::new(x, y));
        assert_eq!(f.at_2d(3, 5), Complex64::new(grid.point(3), grid.point(5)));
        assert_eq!(f.data()[3 * 16 + 5], f.at_2d(3, 5));
    }
}
