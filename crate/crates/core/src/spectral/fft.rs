use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

/// Two-dimensional complex FFT on an `n x n` row-major buffer.
///
/// Forward transforms are unnormalized; inverse transforms divide by `n^2`.
/// Rows are transformed in blocks, columns via an out-of-place transpose.
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Shared plan for size `n`.
    pub fn cached(n: usize) -> Arc<Fft2> {
        static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
        let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = plans.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(Fft2::new(n)))
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        par::for_each_row(data, self.n, |_, row| {
            for c in row {
                *c *= scale;
            }
        });
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer does not match FFT size");
        let mut scratch_t = vec![Complex64::default(); n * n];
        self.rows(data, fft);
        transpose(data, &mut scratch_t, n);
        self.rows(&mut scratch_t, fft);
        transpose(&scratch_t, data, n);
    }

    fn rows(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let rows_per_block = (n / (4 * par::threads())).max(1);
        par::for_each_block(data, n, rows_per_block, |_, block| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(block, &mut scratch);
        });
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    par::for_each_row(dst, n, |j, row| {
        for (i, out) in row.iter_mut().enumerate() {
            *out = src[i * n + j];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_lands_in_one_bin() {
        let n = 16;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                Complex64::new((3.0 * i as f64 * h + 2.0 * j as f64 * h).cos(), 0.0)
            })
            .collect();
        let fft = Fft2::new(n);
        fft.forward(&mut data);
        let big: Vec<usize> = (0..n * n).filter(|&k| data[k].norm() > 1e-9).collect();
        // cos(3x + 2y) -> bins (3, 2) and (-3, -2)
        assert_eq!(big, vec![2 * n + 3, (n - 2) * n + (n - 3)]);
        assert!((data[2 * n + 3].re - (n * n) as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn round_trip() {
        let n = 32;
        let orig: Vec<Complex64> = (0..n * n)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        let fft = Fft2::cached(n);
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
