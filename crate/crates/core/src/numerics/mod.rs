//! Periodic grids, complex fields, and FFT-based spectral operators.
//!
//! Everything lives on the uniform grid of the torus `[0, 2π)^d` with
//! `d ∈ {1, 2}` and a power-of-two number of points per axis. Derivatives
//! and the heat semigroup are exact Fourier multipliers, so the only
//! discretization error in this module is the spectral truncation itself.
//!
//! Wavenumber convention: index `i` on an axis of `N` points carries the
//! integer wavenumber `k ∈ {−N/2+1, …, N/2}`. The Nyquist mode `k = N/2`
//! has no well-defined odd derivative on a real field, so first-derivative
//! multipliers set it to zero; even multipliers such as `|k|²` keep it.

mod fft;
mod field;
mod grid;
mod io;
mod ops;

pub use fft::FftCache;
pub use field::Field;
pub use grid::TorusGrid;
pub use io::{read_field_binary, read_field_csv, write_field_binary, write_field_csv};
pub use ops::{fourier_upsample, h1_seminorm, heat_step, inner, l2_norm, laplacian_apply};
