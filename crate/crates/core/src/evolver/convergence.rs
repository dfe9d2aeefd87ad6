//! Exact single-mode solutions and error measurements for the
//! discretization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sim::{Lab, SimConfig, State};
use super::symbol::DIM;
use crate::error::{Error, Result};

fn wave(lab: &Lab, bin: usize) -> Vec<C> {
    let k = lab.grid.k[bin];
    (0..lab.cfg.n).map(|j| C::new(0.0, k * lab.grid.x(j)).exp()).collect()
}

/// Matrix `A` with `∂_t (v e^{ikx}) = (A v) e^{ikx}` for FFT bin `bin`,
/// with zero differences under the static closure.
pub fn mode_matrix(lab: &Lab, bin: usize) -> DMatrix<C> {
    let n = lab.cfg.n;
    let w = wave(lab, bin);
    let zeros = vec![vec![C::new(0.0, 0.0); n]; 4];
    let mut a = DMatrix::zeros(DIM, DIM);
    for c in 0..DIM {
        let mut s = State::zeros(n);
        s.u[c] = w.clone();
        let r = lab.rhs_with(&s.u, &lab.derivs(&s.u), &zeros, &zeros);
        for i in 0..DIM {
            a[(i, c)] = r[i][0] / w[0];
        }
    }
    a
}

/// A random amplitude vector for a single mode.
pub fn random_amplitude(seed: u64) -> DVector<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(DIM, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn mode_state(lab: &Lab, bin: usize, v: &DVector<C>) -> State {
    let w = wave(lab, bin);
    let mut s = State::zeros(lab.cfg.n);
    for c in 0..DIM {
        s.u[c] = w.iter().map(|z| z * v[c]).collect();
    }
    s
}

/// Largest pointwise deviation of `s` from the exact evolution of the
/// single mode `v e^{ikx}` to time `t`.
pub fn mode_error(lab: &Lab, bin: usize, v: &DVector<C>, t: f64, s: &State) -> f64 {
    let exact = (mode_matrix(lab, bin) * C::new(t, 0.0)).exp() * v;
    let e = mode_state(lab, bin, &exact);
    s.u.iter().flatten().zip(e.u.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderStudy {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log2` of successive error ratios.
    pub orders: Vec<f64>,
}

/// Evolve a single mode at each step size (halving) to time `t_end` and
/// compare with the exact solution.
pub fn temporal_order(base: &SimConfig, bin: usize, dt0: f64, levels: usize, t_end: f64, seed: u64) -> Result<OrderStudy> {
    let v = random_amplitude(seed);
    let mut dts = vec![];
    let mut errors = vec![];
    for l in 0..levels {
        let dt = dt0 / (1u64 << l) as f64;
        let steps = (t_end / dt).round() as usize;
        if (steps as f64 * dt - t_end).abs() > 1e-9 * t_end {
            return Err(Error::Config("t_end must be a multiple of every step size".into()));
        }
        let cfg = SimConfig { dt, steps, background: 0.0, output_every: steps, ..base.clone() };
        let lab = Lab::new(cfg)?;
        let mut s = mode_state(&lab, bin, &v);
        for _ in 0..steps {
            lab.step(&mut s, None);
        }
        dts.push(dt);
        errors.push(mode_error(&lab, bin, &v, t_end, &s));
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(OrderStudy { dts, errors, orders })
}

/// Largest deviation between the discrete right-hand side and the one
/// built from exact derivatives, for smooth periodic data
/// `a_c exp(sin(2πx/L + φ_c))`.
pub fn spatial_error(lab: &Lab, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lab.cfg.n;
    let w = 2.0 * std::f64::consts::PI / lab.cfg.length;
    let mut field = || {
        let a = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let phi: f64 = rng.random_range(0.0..6.3);
        let f: Vec<C> = (0..n).map(|j| a * (w * lab.grid.x(j) + phi).sin().exp()).collect();
        let df: Vec<C> = (0..n).map(|j| f[j] * w * (w * lab.grid.x(j) + phi).cos()).collect();
        (f, df)
    };
    let (u, du): (Vec<_>, Vec<_>) = (0..DIM).map(|_| field()).unzip();
    let (bg, dbg): (Vec<_>, Vec<_>) = (0..4).map(|_| field()).unzip();
    let a = lab.rhs(&u, &bg, None);
    let b = lab.rhs_with(&u, &du, &bg, &dbg);
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_matrix_of_the_massless_system_is_the_symbol() {
        use crate::evolver::{principal_symbol, SpatialBasis, SymbolParams};
        let lab = Lab::new(SimConfig::default()).unwrap();
        let a = mode_matrix(&lab, 3);
        let m = principal_symbol(&SpatialBasis::default(), [0.0, 0.0, 3.0], SymbolParams::default());
        assert!((a - m).norm() < 1e-12);
    }
}
