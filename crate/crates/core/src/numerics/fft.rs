//! Plan-cached FFTs on fields.
//!
//! Forward transforms are unnormalized; inverse transforms carry the full
//! `1/N` per axis so that `inverse(forward(f)) == f` up to roundoff. 2D
//! transforms run the 1D kernel over rows, then over columns through a
//! scratch buffer, which keeps memory traffic linear and results
//! independent of any threading of callers.

use super::field::Field;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Cache of FFT plans keyed by transform length.
///
/// A single cache is cheap to clone around (plans are `Arc`s) and safe to
/// share; planning is locked, execution is lock-free.
#[derive(Clone)]
pub struct FftCache {
    plans: Arc<Mutex<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>>,
}

impl Default for FftCache {
    fn default() -> Self {
        Self::new()
    }
}

impl FftCache {
    pub fn new() -> Self {
        FftCache { plans: Arc::new(Mutex::new(HashMap::new())) }
    }

    fn plan(&self, len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut guard = self.plans.lock().expect("fft plan cache poisoned");
        guard
            .entry(len)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
            })
            .clone()
    }

    /// In-place forward transform along every axis of the field.
    pub fn forward(&self, field: &mut Field) {
        self.transform(field, true);
    }

    /// In-place inverse transform along every axis, normalized by `1/N`
    /// per axis.
    pub fn inverse(&self, field: &mut Field) {
        self.transform(field, false);
        let scale = 1.0 / field.grid().len() as f64;
        field.scale(scale);
    }

    fn transform(&self, field: &mut Field, forward: bool) {
        let n = field.grid().n();
        let dim = field.grid().dim();
        let (fwd, inv) = self.plan(n);
        let plan = if forward { fwd } else { inv };
        let data = field.data_mut();
        match dim {
            1 => plan.process(data),
            2 => {
                for row in data.chunks_exact_mut(n) {
                    plan.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..n {
                    for i in 0..n {
                        col[i] = data[i * n + j];
                    }
                    plan.process(&mut col);
                    for i in 0..n {
                        data[i * n + j] = col[i];
                    }
                }
            }
            _ => unreachable!("TorusGrid guarantees dim 1 or 2"),
        }
    }
}
