//! Type-I discrete sine transform via the FFT of an odd extension.
//!
//! The DST-I is the natural transform for functions vanishing at both
//! endpoints of an interval: it diagonalizes the Dirichlet Laplacian in
//! the sine basis sin(πjk/(N+1)). It is proportional to its own inverse,
//! with `dst ∘ dst = (N+1)/2 · id`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Plan-cached DST-I on real vectors of a fixed or varying length.
#[derive(Clone)]
pub struct Dst1 {
    plans: Arc<Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>>,
}

impl Default for Dst1 {
    fn default() -> Self {
        Self::new()
    }
}

impl Dst1 {
    pub fn new() -> Self {
        Dst1 { plans: Arc::new(Mutex::new(HashMap::new())) }
    }

    fn plan(&self, len: usize) -> Arc<dyn Fft<f64>> {
        let mut guard = self.plans.lock().expect("dst plan cache poisoned");
        guard
            .entry(len)
            .or_insert_with(|| FftPlanner::new().plan_fft_forward(len))
            .clone()
    }

    /// Unnormalized DST-I: X_k = Σ_{j=1}^{N} x_j sin(πjk/(N+1)),
    /// k = 1..N, both indices stored 0-based.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let m = 2 * (n + 1);
        let plan = self.plan(m);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1] = Complex64::new(v, 0.0);
            buf[m - 1 - j] = Complex64::new(-v, 0.0);
        }
        plan.process(&mut buf);
        (1..=n).map(|k| -0.5 * buf[k].im).collect()
    }

    /// Inverse DST-I, normalized so that `inverse(forward(x)) = x`.
    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut out = self.forward(x);
        let s = 2.0 / (n as f64 + 1.0);
        for v in &mut out {
            *v *= s;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn transforms_sine_modes_to_deltas() {
        let n = 31;
        let dst = Dst1::new();
        for p in [1usize, 2, 7, 31] {
            let x: Vec<f64> =
                (1..=n).map(|j| (PI * (j * p) as f64 / (n as f64 + 1.0)).sin()).collect();
            let y = dst.forward(&x);
            for (k, &v) in y.iter().enumerate() {
                let want = if k + 1 == p { (n as f64 + 1.0) / 2.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10, "p={p} k={k}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let n = 64;
        let dst = Dst1::new();
        let x: Vec<f64> = (1..=n).map(|j| ((j * j) as f64 * 0.37).sin()).collect();
        let y = dst.inverse(&dst.forward(&x));
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
