use num_complex::Complex64 as C;
use serde::Serialize;

use super::spinor::{dvec, Sym2};

/// Three symmetric 2×2 matrices with ∂_{AB} = Σ_i b_i ∂_i.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpatialBasis {
    pub mats: [Sym2; 3],
}

impl Default for SpatialBasis {
    /// `k·b = [[-k_x + i k_y, k_z], [k_z, k_x + i k_y]]`, so that
    /// `-det(k·b) = |k|²`.
    fn default() -> Self {
        let z = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        SpatialBasis { mats: [[[-one, z], [z, one]], [[i, z], [z, i]], [[z, one], [one, z]]] }
    }
}

impl SpatialBasis {
    /// `Σ_i k_i b_i`
    pub fn contract(&self, k: [f64; 3]) -> Sym2 {
        let mut out = [[C::new(0.0, 0.0); 2]; 2];
        for (m, &ki) in self.mats.iter().zip(&k) {
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] += m[a][b] * ki;
                }
            }
        }
        out
    }

    /// Eigenvalues of `v_A ↦ (k·b)_{AB} v^B`, which are `±|k|` for a
    /// correctly normalized basis.
    pub fn weyl_eigenvalues(&self, k: [f64; 3]) -> [C; 2] {
        let d = self.contract(k);
        let col0 = dvec(&d, &[C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        let col1 = dvec(&d, &[C::new(0.0, 0.0), C::new(1.0, 0.0)]);
        let (a, b, c, e) = (col0[0], col1[0], col0[1], col1[1]);
        let tr = a + e;
        let det = a * e - b * c;
        let disc = (tr * tr / 4.0 - det).sqrt();
        [tr / 2.0 - disc, tr / 2.0 + disc]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_weyl_operator_has_unit_speed() {
        let b = SpatialBasis::default();
        for k in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.6, -0.0, 0.8], [0.48, 0.6, 0.64]] {
            let mut ev = b.weyl_eigenvalues(k).map(|z| z.re);
            ev.sort_by(f64::total_cmp);
            assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14, "{ev:?}");
        }
    }
}
