//! Method-of-lines evolution of the split system on a periodic line.
//!
//! Dynamical fields are `t_{ABC}`, `p_A = t_A + τ_A`, `s_{ABC}` and
//! `q_A = s_A + σ_A`; the differences `d_A = t_A - τ_A`, `g_A = s_A - σ_A`
//! are not evolved. With `D = ∂_{AB}`:
//!
//! ```text
//! ∂t3 = -D^D t3 + D(d) - m s3        ∂p = ⅓ D p + ⅔ D d + m g
//! ∂s3 =  D^D s3 - D(g) + m t3        ∂q = -⅓ D q - ⅔ D g - m d
//! T_A = D^{BC} t3_{BCA} + 2 D_{AB} p^B + 3m q_A
//! S_A = D^{BC} s3_{BCA} + 2 D_{AB} q^B + 3m p_A
//! ```

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::basis::SpatialBasis;
use super::spectral::Spectral;
use super::spinor::{curl3, div3, dvec, grad_sym3, Sym2};
use super::symbol::{find_symmetrizer, SymbolParams, DIM};
use crate::error::{Error, Result};

pub const T3: usize = 0;
pub const P: usize = 4;
pub const S3: usize = 6;
pub const Q: usize = 10;
/// Offsets into the background arrays.
pub const D: usize = 0;
pub const G: usize = 2;

/// Largest `dt · (max speed) · N / L` for which classical RK4 with Fourier
/// differentiation is stable: the imaginary-axis bound 2√2 divided by π.
pub const STABILITY_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// The differences are fixed arrays.
    #[serde(alias = "static")]
    StaticDifference,
    /// `τ_A = σ_A = 0`, i.e. `d = p`, `g = q` at every evaluation.
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    #[serde(alias = "random")]
    RandomModes,
    Constrained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub mass: f64,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub steps: usize,
    pub closure: Closure,
    pub seed: u64,
    pub init: InitMode,
    /// Random data uses Fourier modes `1..=modes`.
    pub modes: usize,
    /// Amplitude of the random static differences (zero gives d = g = 0).
    pub background: f64,
    /// Spatial direction of the grid line.
    pub direction: [f64; 3],
    /// Write every `output_every`-th step.
    pub output_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mass: 0.0,
            n: 64,
            length: 2.0 * std::f64::consts::PI,
            dt: 0.005,
            steps: 2000,
            closure: Closure::StaticDifference,
            seed: 1,
            init: InitMode::Constrained,
            modes: 4,
            background: 1.0,
            direction: [0.0, 0.0, 1.0],
            output_every: 1,
        }
    }
}

impl SimConfig {
    pub fn cfl(&self) -> f64 {
        self.dt * self.n as f64 / self.length
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n < 4 {
            return bad("grid needs at least 4 points");
        }
        if !(self.length > 0.0) || !(self.dt > 0.0) {
            return bad("length and dt must be positive");
        }
        if !self.mass.is_finite() {
            return bad("mass must be finite");
        }
        if self.modes == 0 || 2 * self.modes >= self.n {
            return bad("modes must lie in 1..n/2");
        }
        if self.output_every == 0 {
            return bad("output_every must be positive");
        }
        if self.direction.iter().all(|x| *x == 0.0) {
            return bad("direction must be nonzero");
        }
        Ok(())
    }

    pub fn check_stability(&self) -> Result<()> {
        if self.cfl() > STABILITY_BOUND {
            return Err(Error::Config(format!(
                "dt·N/L = {:.4} exceeds the stability bound {:.4}",
                self.cfl(),
                STABILITY_BOUND
            )));
        }
        Ok(())
    }

    pub fn unit_direction(&self) -> [f64; 3] {
        let n = self.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.direction.map(|x| x / n)
    }
}

/// Grid state. `u` holds the twelve evolved components, `bg` the four
/// difference components (ignored under the symmetric closure).
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Vec<Vec<C>>,
    pub bg: Vec<Vec<C>>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        State { u: vec![vec![C::new(0.0, 0.0); n]; DIM], bg: vec![vec![C::new(0.0, 0.0); n]; 4] }
    }

    pub fn n(&self) -> usize {
        self.u[0].len()
    }

    fn comp<const K: usize>(v: &[Vec<C>], at: usize, j: usize) -> [C; K] {
        std::array::from_fn(|k| v[at + k][j])
    }

    /// `τ_A = (p_A - d_A) / 2` at grid point `j`.
    pub fn tau(&self, j: usize) -> [C; 2] {
        std::array::from_fn(|k| (self.u[P + k][j] - self.bg[D + k][j]) / 2.0)
    }

    /// `σ_A = (q_A - g_A) / 2` at grid point `j`.
    pub fn sigma(&self, j: usize) -> [C; 2] {
        std::array::from_fn(|k| (self.u[Q + k][j] - self.bg[G + k][j]) / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Everything fixed for a run.
pub struct Lab {
    pub cfg: SimConfig,
    pub grid: Spectral,
    pub dsym: Sym2,
    pub h: DMatrix<C>,
}

impl Lab {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = SpatialBasis::default();
        let dsym = basis.contract(cfg.unit_direction());
        let h = find_symmetrizer(&basis, SymbolParams::default())?.h;
        Ok(Lab { grid: Spectral::new(cfg.n, cfg.length), cfg, dsym, h })
    }

    pub fn derivs(&self, v: &[Vec<C>]) -> Vec<Vec<C>> {
        v.iter().map(|f| self.grid.derivative(f)).collect()
    }

    /// Time derivative of the evolved fields. `dbg` are the spatial
    /// derivatives of the stored differences (static closure only).
    pub fn rhs(&self, u: &[Vec<C>], bg: &[Vec<C>], dbg: Option<&[Vec<C>]>) -> Vec<Vec<C>> {
        let du = self.derivs(u);
        let owned;
        let dbg: &[Vec<C>] = match (self.cfg.closure == Closure::Symmetric, dbg) {
            (true, _) => &[],
            (false, Some(d)) => d,
            (false, None) => {
                owned = self.derivs(bg);
                &owned
            }
        };
        self.rhs_with(u, &du, bg, dbg)
    }

    /// The right-hand side given the line derivatives `du`, `dbg` of the
    /// fields and differences.
    pub fn rhs_with(&self, u: &[Vec<C>], du: &[Vec<C>], bg: &[Vec<C>], dbg: &[Vec<C>]) -> Vec<Vec<C>> {
        let m = self.cfg.mass;
        let n = self.cfg.n;
        let symmetric = self.cfg.closure == Closure::Symmetric;
        let d = &self.dsym;
        let mut out = vec![vec![C::new(0.0, 0.0); n]; DIM];
        for j in 0..n {
            let (dd, dg, bd, bgv): ([C; 2], [C; 2], [C; 2], [C; 2]) = if symmetric {
                (State::comp(du, P, j), State::comp(du, Q, j), State::comp(u, P, j), State::comp(u, Q, j))
            } else {
                (State::comp(dbg, D, j), State::comp(dbg, G, j), State::comp(bg, D, j), State::comp(bg, G, j))
            };
            let t3 = State::comp::<4>(u, T3, j);
            let s3 = State::comp::<4>(u, S3, j);
            let ct = curl3(d, &State::comp(du, T3, j));
            let cs = curl3(d, &State::comp(du, S3, j));
            let gd = grad_sym3(d, &dd);
            let gg = grad_sym3(d, &dg);
            let vp = dvec(d, &State::comp(du, P, j));
            let vq = dvec(d, &State::comp(du, Q, j));
            let vd = dvec(d, &dd);
            let vg = dvec(d, &dg);
            for k in 0..4 {
                out[T3 + k][j] = -ct[k] + gd[k] - m * s3[k];
                out[S3 + k][j] = cs[k] - gg[k] + m * t3[k];
            }
            for k in 0..2 {
                out[P + k][j] = vp[k] / 3.0 + 2.0 * vd[k] / 3.0 + m * bgv[k];
                out[Q + k][j] = -vq[k] / 3.0 - 2.0 * vg[k] / 3.0 - m * bd[k];
            }
        }
        out
    }

    /// Constraint fields `(T_A, S_A)` per grid point.
    pub fn constraints(&self, s: &State) -> (Vec<[C; 2]>, Vec<[C; 2]>) {
        let m = self.cfg.mass;
        let du = self.derivs(&s.u);
        let d = &self.dsym;
        (0..self.cfg.n)
            .map(|j| {
                let dt3 = div3(d, &State::comp(&du, T3, j));
                let ds3 = div3(d, &State::comp(&du, S3, j));
                let vp = dvec(d, &State::comp(&du, P, j));
                let vq = dvec(d, &State::comp(&du, Q, j));
                let t = std::array::from_fn(|k| dt3[k] + 2.0 * vp[k] + 3.0 * m * s.u[Q + k][j]);
                let sv = std::array::from_fn(|k| ds3[k] + 2.0 * vq[k] + 3.0 * m * s.u[P + k][j]);
                (t, sv)
            })
            .unzip()
    }

    fn dx(&self) -> f64 {
        self.cfg.length / self.cfg.n as f64
    }

    /// Discrete L² norm over grid points and spinor components.
    pub fn norm(&self, f: &[[C; 2]]) -> f64 {
        (self.dx() * f.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `Σ_x u* H u dx`.
    pub fn energy(&self, s: &State) -> f64 {
        let mut e = 0.0;
        for j in 0..self.cfg.n {
            for a in 0..DIM {
                let mut hu = C::new(0.0, 0.0);
                for b in 0..DIM {
                    hu += self.h[(a, b)] * s.u[b][j];
                }
                e += (s.u[a][j].conj() * hu).re;
            }
        }
        e * self.dx()
    }

    pub fn row(&self, step: usize, s: &State) -> Row {
        let (t, sv) = self.constraints(s);
        Row {
            step,
            time: step as f64 * self.cfg.dt,
            norm_t: self.norm(&t),
            norm_s: self.norm(&sv),
            energy: self.energy(s),
        }
    }

    fn axpy(u: &[Vec<C>], k: &[Vec<C>], h: f64) -> Vec<Vec<C>> {
        u.iter().zip(k).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * h).collect()).collect()
    }

    /// One classical RK4 step; the differences are never written.
    pub fn step(&self, s: &mut State, dbg: Option<&[Vec<C>]>) {
        let h = self.cfg.dt;
        let k1 = self.rhs(&s.u, &s.bg, dbg);
        let k2 = self.rhs(&Self::axpy(&s.u, &k1, h / 2.0), &s.bg, dbg);
        let k3 = self.rhs(&Self::axpy(&s.u, &k2, h / 2.0), &s.bg, dbg);
        let k4 = self.rhs(&Self::axpy(&s.u, &k3, h), &s.bg, dbg);
        for c in 0..DIM {
            for j in 0..self.cfg.n {
                s.u[c][j] += (k1[c][j] + 2.0 * k2[c][j] + 2.0 * k3[c][j] + k4[c][j]) * (h / 6.0);
            }
        }
    }

    /// Run from `s` for `cfg.steps` steps, recording every
    /// `output_every`-th row (and the last).
    pub fn run(&self, s: &mut State) -> Result<TimeSeries> {
        let dbg = (self.cfg.closure == Closure::StaticDifference).then(|| self.derivs(&s.bg));
        let mut rows = vec![self.row(0, s)];
        for k in 1..=self.cfg.steps {
            self.step(s, dbg.as_deref());
            if !s.is_finite() || s.u.iter().flatten().any(|z| z.norm() > 1e150) {
                return Err(Error::Numerical(format!("non-finite state at step {k}; last stable step {}", k - 1)));
            }
            if k % self.cfg.output_every == 0 || k == self.cfg.steps {
                rows.push(self.row(k, s));
            }
        }
        Ok(TimeSeries { rows })
    }

    /// Random field with Fourier modes `1..=modes`, amplitude falling as 1/k.
    pub fn random_field(&self, rng: &mut ChaCha8Rng) -> Vec<C> {
        let mut h = vec![C::new(0.0, 0.0); self.cfg.n];
        let n = self.cfg.n;
        for k in 1..=self.cfg.modes {
            for bin in [k, n - k] {
                let a = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                h[bin] = a * (n as f64 / k as f64);
            }
        }
        self.grid.inverse(&h)
    }

    /// Initial state for the configured mode.
    pub fn initial_state(&self) -> Result<State> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut s = State::zeros(self.cfg.n);
        for c in 0..DIM {
            s.u[c] = self.random_field(&mut rng);
        }
        for c in 0..4 {
            s.bg[c] = self.random_field(&mut rng).iter().map(|z| z * self.cfg.background).collect();
        }
        if self.cfg.init == InitMode::Constrained {
            self.solve_constraints(&mut s)?;
        }
        Ok(s)
    }

    /// Replace `p`, `q` by the solution of `T = S = 0` for the given `t3`,
    /// `s3`, mode by mode. In the mean (and the Nyquist bin, whose
    /// wavenumber is zeroed) only the mass terms remain: `3m q = 3m p = 0`,
    /// satisfied by `p = q = 0` for any mass.
    pub fn solve_constraints(&self, s: &mut State) -> Result<()> {
        let m = self.cfg.mass;
        let n = self.cfg.n;
        let ht: Vec<Vec<C>> = (0..4).map(|k| self.grid.forward(&s.u[T3 + k])).collect();
        let hs: Vec<Vec<C>> = (0..4).map(|k| self.grid.forward(&s.u[S3 + k])).collect();
        let mut hp = vec![vec![C::new(0.0, 0.0); n]; 2];
        let mut hq = vec![vec![C::new(0.0, 0.0); n]; 2];
        for j in 0..n {
            let ik = C::new(0.0, self.grid.k[j]);
            let dk: Sym2 = self.dsym.map(|r| r.map(|x| x * ik));
            let rt = div3(&dk, &std::array::from_fn(|c| ht[c][j]));
            let rs = div3(&dk, &std::array::from_fn(|c| hs[c][j]));
            if self.grid.k[j] == 0.0 {
                continue;
            }
            let c0 = dvec(&dk, &[C::new(1.0, 0.0), C::new(0.0, 0.0)]);
            let c1 = dvec(&dk, &[C::new(0.0, 0.0), C::new(1.0, 0.0)]);
            let z = C::new(0.0, 0.0);
            let mm = C::new(3.0 * m, 0.0);
            let a = Matrix4::new(
                2.0 * c0[0], 2.0 * c1[0], mm, z,
                2.0 * c0[1], 2.0 * c1[1], z, mm,
                mm, z, 2.0 * c0[0], 2.0 * c1[0],
                z, mm, 2.0 * c0[1], 2.0 * c1[1],
            );
            let b = Vector4::new(-rt[0], -rt[1], -rs[0], -rs[1]);
            let x = a.lu().solve(&b).ok_or_else(|| Error::Numerical(format!("singular constraint solve at bin {j}")))?;
            hp[0][j] = x[0];
            hp[1][j] = x[1];
            hq[0][j] = x[2];
            hq[1][j] = x[3];
        }
        for k in 0..2 {
            s.u[P + k] = self.grid.inverse(&hp[k]);
            s.u[Q + k] = self.grid.inverse(&hq[k]);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub step: usize,
    pub time: f64,
    #[serde(rename = "normT")]
    pub norm_t: f64,
    #[serde(rename = "normS")]
    pub norm_s: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub rows: Vec<Row>,
}

/// Build the lab, draw initial data and run.
pub fn evolve(cfg: &SimConfig) -> Result<(TimeSeries, State)> {
    cfg.check_stability()?;
    let lab = Lab::new(cfg.clone())?;
    let mut s = lab.initial_state()?;
    let ts = lab.run(&mut s)?;
    Ok((ts, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_has_zero_derivative() {
        let lab = Lab::new(SimConfig { mass: 1.0, ..SimConfig::default() }).unwrap();
        let s = State::zeros(64);
        assert!(lab.rhs(&s.u, &s.bg, None).iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn constrained_data_satisfy_the_constraints() {
        for mass in [0.0, 1.0] {
            let lab = Lab::new(SimConfig { mass, init: InitMode::Constrained, ..SimConfig::default() }).unwrap();
            let s = lab.initial_state().unwrap();
            let (t, sv) = lab.constraints(&s);
            assert!(lab.norm(&t) < 1e-12 && lab.norm(&sv) < 1e-12);
        }
    }
}
