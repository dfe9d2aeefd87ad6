//! Massless gauge shift `χ_{AA'B'} ↦ χ_{AA'B'} + ∇_{AA'} χ_{B'}` on grid
//! data. In the split the gauge spinor contributes `χ_A` on the slice and
//! its normal derivative `χ̇_A`, which are independent.

use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sim::{Lab, State, D, P, T3};
use super::spinor::{dvec, grad_sym3};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeVariant {
    /// Shifts obtained by splitting the gradient:
    /// `δt3 = ∂_{(AB}χ_{C)}`, `δt_A = ½χ̇_A + ⅙∂_{AB}χ^B`,
    /// `δτ_A = -½χ̇_A + ½∂_{AB}χ^B`.
    Derived,
    /// `t_A ↦ t_A - 3/2 χ̇_A + ½∂_{AB}χ^B`,
    /// `τ_A ↦ -τ_A - χ̇_A + ∂_{AB}χ^B`, same `δt3`. Does not preserve
    /// the constraints.
    Literal,
}

/// Gauge spinor on the grid: `chi[A][j]`, `dchi[A][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    pub chi: [Vec<C>; 2],
    pub dchi: [Vec<C>; 2],
}

impl GaugeField {
    /// Band-limited random `χ_A` and `χ̇_A`.
    pub fn random(lab: &Lab, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = std::array::from_fn(|_| lab.random_field(&mut rng));
        let dchi = std::array::from_fn(|_| lab.random_field(&mut rng));
        GaugeField { chi, dchi }
    }

    /// The choice `χ = 0`, `χ̇ = 2τ`, which removes `τ_A` under the derived
    /// variant.
    pub fn removing_tau(s: &State) -> Self {
        let n = s.n();
        let zero = vec![C::new(0.0, 0.0); n];
        let dchi = std::array::from_fn(|k| (0..n).map(|j| 2.0 * s.tau(j)[k]).collect());
        GaugeField { chi: [zero.clone(), zero], dchi }
    }
}

/// Apply the gauge shift to `s`. The differences `d_A = t_A - τ_A` are
/// part of the data being transformed, so they change here even though the
/// integrator never writes them.
pub fn apply_gauge(lab: &Lab, s: &mut State, g: &GaugeField, variant: GaugeVariant) -> Result<()> {
    if lab.cfg.mass != 0.0 {
        return Err(Error::Config("the gauge shift is a symmetry only for m = 0".into()));
    }
    let n = s.n();
    if g.chi.iter().chain(&g.dchi).any(|f| f.len() != n) {
        return Err(Error::Config("gauge field does not match the grid".into()));
    }
    let dchi_x = g.chi.clone().map(|f| lab.grid.derivative(&f));
    let d = &lab.dsym;
    for j in 0..n {
        let dx = [dchi_x[0][j], dchi_x[1][j]];
        let cd = [g.dchi[0][j], g.dchi[1][j]];
        let g3 = grad_sym3(d, &dx);
        let v = dvec(d, &dx);
        for k in 0..4 {
            s.u[T3 + k][j] += g3[k];
        }
        let p = [s.u[P][j], s.u[P + 1][j]];
        let dd = [s.bg[D][j], s.bg[D + 1][j]];
        for k in 0..2 {
            let t = (p[k] + dd[k]) / 2.0;
            let tau = (p[k] - dd[k]) / 2.0;
            let (t1, tau1) = match variant {
                GaugeVariant::Derived => (t + cd[k] / 2.0 + v[k] / 6.0, tau - cd[k] / 2.0 + v[k] / 2.0),
                GaugeVariant::Literal => (t - 1.5 * cd[k] + v[k] / 2.0, -tau - cd[k] + v[k]),
            };
            s.u[P + k][j] = t1 + tau1;
            s.bg[D + k][j] = t1 - tau1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolver::sim::SimConfig;

    #[test]
    fn refuses_massive_fields() {
        let lab = Lab::new(SimConfig { mass: 1.0, ..SimConfig::default() }).unwrap();
        let mut s = lab.initial_state().unwrap();
        let g = GaugeField::removing_tau(&s);
        assert!(matches!(apply_gauge(&lab, &mut s, &g, GaugeVariant::Derived), Err(Error::Config(_))));
    }

    #[test]
    fn literal_variant_at_zero_chi_is_an_involution() {
        let lab = Lab::new(SimConfig::default()).unwrap();
        let s0 = lab.initial_state().unwrap();
        let zero = vec![C::new(0.0, 0.0); 64];
        let g = GaugeField { chi: [zero.clone(), zero.clone()], dchi: [zero.clone(), zero] };
        let mut s = s0.clone();
        apply_gauge(&lab, &mut s, &g, GaugeVariant::Literal).unwrap();
        assert!((0..64).all(|j| (0..2).all(|k| (s.tau(j)[k] + s0.tau(j)[k]).norm() < 1e-14)));
        apply_gauge(&lab, &mut s, &g, GaugeVariant::Literal).unwrap();
        let diff = s.u.iter().chain(&s.bg).flatten().zip(s0.u.iter().chain(&s0.bg).flatten()).map(|(a, b)| (a - b).norm());
        assert!(diff.fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn removes_tau() {
        let lab = Lab::new(SimConfig::default()).unwrap();
        let mut s = lab.initial_state().unwrap();
        let g = GaugeField::removing_tau(&s);
        apply_gauge(&lab, &mut s, &g, GaugeVariant::Derived).unwrap();
        assert!((0..64).all(|j| s.tau(j).iter().all(|z| z.norm() < 1e-12)));
    }
}
