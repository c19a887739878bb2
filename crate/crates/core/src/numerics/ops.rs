//! Spectral operators and quadrature on torus fields.

use super::fft::FftCache;
use super::field::Field;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// L² norm with trapezoidal (here: exact periodic) quadrature,
/// ‖f‖ = √(hᵈ Σ|fᵢ|²).
pub fn l2_norm(f: &Field) -> f64 {
    let w = f.grid().quad_weight();
    (w * f.data().iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Hermitian inner product ⟨f, g⟩ = hᵈ Σ conj(fᵢ) gᵢ.
pub fn inner(f: &Field, g: &Field) -> Complex64 {
    assert_eq!(f.grid(), g.grid(), "inner product requires matching grids");
    let w = f.grid().quad_weight();
    f.data()
        .iter()
        .zip(g.data())
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        * w
}

/// Exact heat semigroup step: multiplies each Fourier mode by
/// e^{−ν|k|² dt}. Unconditionally stable for dt ≥ 0.
pub fn heat_step(f: &mut Field, nu: f64, dt: f64, cache: &FftCache) {
    assert!(dt >= 0.0, "heat_step requires dt >= 0");
    cache.forward(f);
    apply_symbol(f, |k2| Complex64::new((-nu * k2 * dt).exp(), 0.0));
    cache.inverse(f);
}

/// Applies −Δ in place (positive semidefinite sign convention): each mode
/// is multiplied by |k|².
pub fn laplacian_apply(f: &mut Field, cache: &FftCache) {
    cache.forward(f);
    apply_symbol(f, |k2| Complex64::new(k2, 0.0));
    cache.inverse(f);
}

/// H¹ seminorm |f|₁ = ‖∇f‖ computed spectrally via Parseval. The Nyquist
/// mode is excluded, matching the first-derivative convention.
pub fn h1_seminorm(f: &Field, cache: &FftCache) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let mut hat = f.clone();
    cache.forward(&mut hat);
    // Parseval on the unnormalized DFT: ‖f‖² = (2π)ᵈ/N^{2d} Σ|f̂ₖ|².
    let parseval = (2.0 * std::f64::consts::PI).powi(grid.dim() as i32)
        / (grid.len() as f64).powi(2);
    let mut sum = 0.0;
    match grid.dim() {
        1 => {
            for (i, z) in hat.data().iter().enumerate() {
                let k = grid.wavenumber_deriv(i) as f64;
                sum += k * k * z.norm_sqr();
            }
        }
        2 => {
            for (idx, z) in hat.data().iter().enumerate() {
                let kx = grid.wavenumber_deriv(idx / n) as f64;
                let ky = grid.wavenumber_deriv(idx % n) as f64;
                sum += (kx * kx + ky * ky) * z.norm_sqr();
            }
        }
        _ => unreachable!("TorusGrid guarantees dim 1 or 2"),
    }
    (parseval * sum).sqrt()
}

/// Trigonometric interpolation onto a finer grid of the same dimension:
/// Fourier coefficients are zero-padded, with each coarse Nyquist mode
/// split evenly between ±N/2 so that real fields stay real.
pub fn fourier_upsample(f: &Field, target_n: usize, cache: &FftCache) -> Result<Field> {
    let grid = f.grid();
    let n = grid.n();
    if target_n < n {
        return Err(Error::Config(format!(
            "upsample target {target_n} is below the source grid {n}"
        )));
    }
    if target_n == n {
        return Ok(f.clone());
    }
    let fine_grid = TorusGrid::new(target_n, grid.dim())?;
    let mut hat = f.clone();
    cache.forward(&mut hat);
    let scale = (target_n as f64 / n as f64).powi(grid.dim() as i32);
    let spread: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let k = grid.wavenumber(i);
            if 2 * i == n {
                vec![(i, 0.5), (target_n - i, 0.5)]
            } else if k >= 0 {
                vec![(k as usize, 1.0)]
            } else {
                vec![((target_n as i64 + k) as usize, 1.0)]
            }
        })
        .collect();
    let mut fine = Field::zeros(fine_grid);
    match grid.dim() {
        1 => {
            for (i, z) in hat.data().iter().enumerate() {
                for &(fi, w) in &spread[i] {
                    fine.data_mut()[fi] += z * w * scale;
                }
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    let z = hat.data()[i * n + j] * scale;
                    for &(fi, wi) in &spread[i] {
                        for &(fj, wj) in &spread[j] {
                            fine.data_mut()[fi * target_n + fj] += z * wi * wj;
                        }
                    }
                }
            }
        }
        _ => unreachable!("TorusGrid guarantees dim 1 or 2"),
    }
    cache.inverse(&mut fine);
    Ok(fine)
}

fn apply_symbol(hat: &mut Field, symbol: impl Fn(f64) -> Complex64) {
    let grid = hat.grid();
    let n = grid.n();
    match grid.dim() {
        1 => {
            for (i, z) in hat.data_mut().iter_mut().enumerate() {
                let k = grid.wavenumber(i) as f64;
                *z *= symbol(k * k);
            }
        }
        2 => {
            for (idx, z) in hat.data_mut().iter_mut().enumerate() {
                let kx = grid.wavenumber(idx / n) as f64;
                let ky = grid.wavenumber(idx % n) as f64;
                *z *= symbol(kx * kx + ky * ky);
            }
        }
        _ => unreachable!("TorusGrid guarantees dim 1 or 2"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::TorusGrid;
    use std::f64::consts::PI;

    fn wave(n: usize, k: i64) -> Field {
        let grid = TorusGrid::new(n, 1).unwrap();
        Field::from_fn_1d(grid, |y| Complex64::from_polar(1.0, k as f64 * y))
    }

    #[test]
    fn fft_round_trip_is_identity() {
        let cache = FftCache::new();
        let grid = TorusGrid::new(64, 2).unwrap();
        let mut f = Field::from_fn_2d(grid, |x, y| {
            Complex64::new((3.0 * x).cos() * y.sin(), (x - 2.0 * y).sin())
        });
        let original = f.clone();
        cache.forward(&mut f);
        cache.inverse(&mut f);
        let err: f64 = f
            .data()
            .iter()
            .zip(original.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round-trip error {err}");
    }

    #[test]
    fn l2_norm_of_plane_wave() {
        // ‖e^{iky}‖² = 2π on the torus.
        let f = wave(128, 5);
        assert!((l2_norm(&f) - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parseval_matches_physical_norm() {
        let cache = FftCache::new();
        let grid = TorusGrid::new(64, 1).unwrap();
        let f = Field::from_fn_1d(grid, |y| {
            Complex64::new(y.sin() + 0.3 * (4.0 * y).cos(), (2.0 * y).sin())
        });
        let phys = l2_norm(&f);
        let mut hat = f.clone();
        cache.forward(&mut hat);
        let spec = ((2.0 * PI / (64.0 * 64.0))
            * hat.data().iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sqrt();
        assert!((phys - spec).abs() < 1e-12 * phys.max(1.0));
    }

    #[test]
    fn heat_step_decays_single_mode_exactly() {
        let cache = FftCache::new();
        let k = 3i64;
        let nu = 0.7;
        let dt = 0.25;
        let mut f = wave(64, k);
        heat_step(&mut f, nu, dt, &cache);
        let expected = (-nu * (k * k) as f64 * dt).exp();
        for (i, z) in f.data().iter().enumerate() {
            let y = f.grid().point(i);
            let want = Complex64::from_polar(expected, k as f64 * y);
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn heat_semigroup_composes() {
        let cache = FftCache::new();
        let grid = TorusGrid::new(64, 1).unwrap();
        let f0 = Field::from_fn_1d(grid, |y| {
            Complex64::new((2.0 * y).sin(), (5.0 * y).cos())
        });
        let nu = 0.31;
        let mut once = f0.clone();
        heat_step(&mut once, nu, 0.7, &cache);
        let mut twice = f0.clone();
        heat_step(&mut twice, nu, 0.3, &cache);
        heat_step(&mut twice, nu, 0.4, &cache);
        let err: f64 = once
            .data()
            .iter()
            .zip(twice.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "semigroup composition error {err}");
    }

    #[test]
    fn heat_step_preserves_mean() {
        let cache = FftCache::new();
        let grid = TorusGrid::new(64, 2).unwrap();
        let mut f = Field::from_fn_2d(grid, |x, y| {
            Complex64::new(1.0 + x.sin() * y.cos(), x.cos())
        });
        let mean_before: Complex64 =
            f.data().iter().sum::<Complex64>() / f.grid().len() as f64;
        heat_step(&mut f, 1.3, 0.5, &cache);
        let mean_after: Complex64 =
            f.data().iter().sum::<Complex64>() / f.grid().len() as f64;
        assert!((mean_before - mean_after).norm() < 1e-13);
    }

    #[test]
    fn h1_seminorm_of_plane_wave() {
        // |e^{iky}|₁ = |k| √(2π).
        let cache = FftCache::new();
        for k in [1i64, 4, 11] {
            let f = wave(128, k);
            let want = k as f64 * (2.0 * PI).sqrt();
            let got = h1_seminorm(&f, &cache);
            assert!((got - want).abs() < 1e-10 * want, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn laplacian_matches_symbol_on_mode() {
        let cache = FftCache::new();
        let mut f = wave(64, 4);
        let original = f.clone();
        laplacian_apply(&mut f, &cache);
        for (a, b) in f.data().iter().zip(original.data()) {
            assert!((a - b * 16.0).norm() < 1e-11);
        }
    }

    #[test]
    fn upsample_reproduces_trigonometric_values() {
        let cache = FftCache::new();
        let grid = TorusGrid::new(32, 1).unwrap();
        let f = Field::from_fn_1d(grid, |y| {
            Complex64::new((3.0 * y).sin() + 0.5 * (7.0 * y).cos(), (2.0 * y).cos())
        });
        let fine = fourier_upsample(&f, 128, &cache).unwrap();
        for (i, z) in fine.data().iter().enumerate() {
            let y = fine.grid().point(i);
            let want =
                Complex64::new((3.0 * y).sin() + 0.5 * (7.0 * y).cos(), (2.0 * y).cos());
            assert!((z - want).norm() < 1e-11, "point {i}: {z} vs {want}");
        }
    }

    #[test]
    fn upsample_splits_nyquist_into_cosine() {
        // cos(16y) sampled on 32 points hits the Nyquist mode exactly;
        // the split reproduces the cosine, not a one-sided exponential.
        let cache = FftCache::new();
        let grid = TorusGrid::new(32, 1).unwrap();
        let f = Field::from_fn_1d(grid, |y| Complex64::new((16.0 * y).cos(), 0.0));
        let fine = fourier_upsample(&f, 64, &cache).unwrap();
        for (i, z) in fine.data().iter().enumerate() {
            let y = fine.grid().point(i);
            assert!((z.re - (16.0 * y).cos()).abs() < 1e-11);
            assert!(z.im.abs() < 1e-11);
        }
    }

    #[test]
    fn upsample_2d_matches_analytic_field() {
        let cache = FftCache::new();
        let grid = TorusGrid::new(16, 2).unwrap();
        let f = Field::from_fn_2d(grid, |x, y| {
            Complex64::new((2.0 * x).sin() * (3.0 * y).cos(), (x + y).sin())
        });
        let fine = fourier_upsample(&f, 64, &cache).unwrap();
        let n = 64;
        for i in 0..n {
            for j in 0..n {
                let x = fine.grid().point(i);
                let y = fine.grid().point(j);
                let want =
                    Complex64::new((2.0 * x).sin() * (3.0 * y).cos(), (x + y).sin());
                let got = fine.data()[i * n + j];
                assert!((got - want).norm() < 1e-11);
            }
        }
    }
}
