use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C;
use rustfft::{Fft, FftPlanner};

/// Fourier differentiation on a periodic grid of `n` points over length `l`.
#[derive(Clone)]
pub struct Spectral {
    pub n: usize,
    pub l: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Wavenumber of each FFT bin; the Nyquist bin is zero so that
    /// differentiation maps real data to real data.
    pub k: Vec<f64>,
}

impl Spectral {
    pub fn new(n: usize, l: f64) -> Self {
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                let j = j as i64;
                let n = n as i64;
                let m = if j < (n + 1) / 2 { j } else if 2 * j == n { 0 } else { j - n };
                2.0 * PI * m as f64 / l
            })
            .collect();
        Spectral { n, l, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), k }
    }

    pub fn forward(&self, f: &[C]) -> Vec<C> {
        let mut buf = f.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform including the 1/n normalization.
    pub fn inverse(&self, f: &[C]) -> Vec<C> {
        let mut buf = f.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|x| *x *= s);
        buf
    }

    pub fn derivative(&self, f: &[C]) -> Vec<C> {
        let mut h = self.forward(f);
        for (x, k) in h.iter_mut().zip(&self.k) {
            *x *= C::new(0.0, *k);
        }
        self.inverse(&h)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.l * j as f64 / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_a_resolved_mode() {
        let s = Spectral::new(16, 2.0 * PI);
        let f: Vec<C> = (0..16).map(|j| C::new(0.0, 3.0 * s.x(j)).exp()).collect();
        let d = s.derivative(&f);
        for (a, b) in d.iter().zip(&f) {
            assert!((a - C::new(0.0, 3.0) * b).norm() < 1e-13);
        }
    }
}
