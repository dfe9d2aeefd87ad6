//! Component arithmetic for the unprimed space spinors of the split
//! system. A totally symmetric three-index spinor is stored by the number
//! of its indices equal to 1 (`t_000, t_001, t_011, t_111`).
//!
//! Every operator takes the symbol `d` of ∂_{AB}: a symmetric 2×2 matrix
//! that multiplies a (derivative of a) component. Conventions:
//! ε_{01} = ε^{01} = 1, ξ^A = ε^{AB} ξ_B.

use num_complex::Complex64 as C;

pub type Sym2 = [[C; 2]; 2];

/// Multiplicity of each stored component of a symmetric three-spinor.
pub const SYM3_WEIGHTS: [f64; 4] = [1.0, 3.0, 3.0, 1.0];

#[inline]
pub fn sym3(t: &[C; 4], a: usize, b: usize, c: usize) -> C {
    t[a + b + c]
}

/// Representative index triple of stored component `k`.
const REP: [[usize; 3]; 4] = [[0, 0, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1]];

#[inline]
pub fn raise(v: &[C; 2]) -> [C; 2] {
    [v[1], -v[0]]
}

/// `∂_{AB} v^B`
pub fn dvec(d: &Sym2, v: &[C; 2]) -> [C; 2] {
    let u = raise(v);
    [d[0][0] * u[0] + d[0][1] * u[1], d[1][0] * u[0] + d[1][1] * u[1]]
}

/// `∂_{(AB} v_{C)}`
pub fn grad_sym3(d: &Sym2, v: &[C; 2]) -> [C; 4] {
    REP.map(|[a, b, c]| (d[a][b] * v[c] + d[b][c] * v[a] + d[a][c] * v[b]) / 3.0)
}

/// `∂_{(A}{}^{D} t_{BC)D}`
pub fn curl3(d: &Sym2, t: &[C; 4]) -> [C; 4] {
    // W_{ABC} = ∂_A^D t_{BCD} = ∂_{A1} t_{BC0} - ∂_{A0} t_{BC1}
    let w = |a: usize, b: usize, c: usize| d[a][1] * sym3(t, b, c, 0) - d[a][0] * sym3(t, b, c, 1);
    REP.map(|[a, b, c]| (w(a, b, c) + w(b, c, a) + w(c, a, b)) / 3.0)
}

/// `∂^{BC} t_{BCA}`
pub fn div3(d: &Sym2, t: &[C; 4]) -> [C; 2] {
    let s = [1.0, -1.0];
    let mut out = [C::new(0.0, 0.0); 2];
    for (a, o) in out.iter_mut().enumerate() {
        for b in 0..2 {
            for c in 0..2 {
                *o += s[b] * s[c] * d[1 - b][1 - c] * sym3(t, b, c, a);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn raise_then_contract_is_antisymmetric() {
        // ξ^A η_A = -ξ_A η^A
        let x = [c(1.0, 2.0), c(-0.5, 0.3)];
        let y = [c(0.7, -1.1), c(2.0, 0.1)];
        let (xu, yu) = (raise(&x), raise(&y));
        let l = xu[0] * y[0] + xu[1] * y[1];
        let r = x[0] * yu[0] + x[1] * yu[1];
        assert!((l + r).norm() < 1e-15);
    }

    #[test]
    fn divergence_of_a_symmetrized_gradient() {
        // ∂^{BC} ∂_{(BC} v_{A)} = -(4/3) ∂_{AB} ∂^{B}{}_{C} v^C for commuting symbols
        let d: Sym2 = [[c(0.3, 0.1), c(-0.2, 0.4)], [c(-0.2, 0.4), c(1.1, -0.7)]];
        let v = [c(0.9, -0.2), c(0.1, 0.5)];
        let a = div3(&d, &grad_sym3(&d, &v));
        let b = dvec(&d, &dvec(&d, &v));
        for k in 0..2 {
            assert!((a[k] + (4.0 / 3.0) * b[k]).norm() < 1e-14);
        }
    }
}
