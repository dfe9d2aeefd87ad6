//! Principal symbol of the evolution system, characteristic speeds and a
//! symmetrizer certificate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use serde::Serialize;

use super::basis::SpatialBasis;
use super::spinor::{curl3, dvec, Sym2, SYM3_WEIGHTS};
use crate::error::{Error, Result};

pub const DIM: usize = 12;

/// Coefficients of the principal part. `trace` multiplies ∂_{AB} in the
/// equations for `t_A + τ_A` and `s_A + σ_A`; changing it is a fault
/// injection used by the tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymbolParams {
    pub trace: f64,
}

impl Default for SymbolParams {
    fn default() -> Self {
        SymbolParams { trace: 1.0 / 3.0 }
    }
}

fn slice<const N: usize>(u: &[C], at: usize) -> [C; N] {
    std::array::from_fn(|k| u[at + k])
}

/// Principal part acting on `(t3, p, s3, q)` for the derivative symbol `d`.
pub fn principal_apply(d: &Sym2, u: &[C], params: SymbolParams) -> [C; DIM] {
    let t3 = curl3(d, &slice::<4>(u, 0));
    let p = dvec(d, &slice::<2>(u, 4));
    let s3 = curl3(d, &slice::<4>(u, 6));
    let q = dvec(d, &slice::<2>(u, 10));
    let mut out = [C::new(0.0, 0.0); DIM];
    for k in 0..4 {
        out[k] = -t3[k];
        out[6 + k] = s3[k];
    }
    for k in 0..2 {
        out[4 + k] = params.trace * p[k];
        out[10 + k] = -params.trace * q[k];
    }
    out
}

/// `M(k)` with `∂u = M(k) u` for plane waves `u ∝ exp(i k·x)`.
pub fn principal_symbol(basis: &SpatialBasis, k: [f64; 3], params: SymbolParams) -> DMatrix<C> {
    let mut d = basis.contract(k);
    for row in d.iter_mut() {
        for x in row.iter_mut() {
            *x *= C::new(0.0, 1.0);
        }
    }
    let mut m = DMatrix::zeros(DIM, DIM);
    for j in 0..DIM {
        let mut e = [C::new(0.0, 0.0); DIM];
        e[j] = C::new(1.0, 0.0);
        let col = principal_apply(&d, &e, params);
        for i in 0..DIM {
            m[(i, j)] = col[i];
        }
    }
    m
}

fn norm3(k: [f64; 3]) -> f64 {
    k.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Imaginary parts of the eigenvalues of `M(k)` for unit `k`, sorted.
/// Fails when an eigenvalue has a real part (loss of hyperbolicity).
pub fn characteristic_speeds(basis: &SpatialBasis, k: [f64; 3], params: SymbolParams) -> Result<Vec<f64>> {
    let n = norm3(k);
    if !(n > 0.0) {
        return Err(Error::Config("direction must be nonzero".into()));
    }
    let k = k.map(|x| x / n);
    let m = principal_symbol(basis, k, params);
    let ev = m
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("eigenvalue computation did not converge".into()))?;
    let mut out = Vec::with_capacity(DIM);
    for z in ev.iter() {
        if z.re.abs() > 1e-10 {
            return Err(Error::Numerical(format!("eigenvalue {z} is not imaginary: system not hyperbolic")));
        }
        out.push(z.im);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Distinct speeds with multiplicities, merging values closer than `tol`.
pub fn speed_set(speeds: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = vec![];
    for &s in speeds {
        match out.last_mut() {
            Some((v, n)) if (s - *v).abs() <= tol => *n += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Symmetrizer {
    #[serde(skip)]
    pub h: DMatrix<C>,
    /// Eigenvalues of H, ascending.
    pub spectrum: Vec<f64>,
    /// Which starting candidate the projection used.
    pub candidate: String,
}

/// `‖H M + (H M)*‖` in the Frobenius norm.
pub fn symmetrizer_residual(h: &DMatrix<C>, m: &DMatrix<C>) -> f64 {
    let hm = h * m;
    (&hm + hm.adjoint()).norm()
}

/// Hermitian basis matrices: diagonal units, then `E_jk + E_kj` and
/// `i(E_jk - E_kj)` for `j < k`.
fn hermitian_basis(n: usize) -> Vec<DMatrix<C>> {
    let mut out = vec![];
    for j in 0..n {
        let mut e = DMatrix::zeros(n, n);
        e[(j, j)] = C::new(1.0, 0.0);
        out.push(e);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut s = DMatrix::zeros(n, n);
            s[(j, k)] = C::new(1.0, 0.0);
            s[(k, j)] = C::new(1.0, 0.0);
            out.push(s);
            let mut a = DMatrix::zeros(n, n);
            a[(j, k)] = C::new(0.0, 1.0);
            a[(k, j)] = C::new(0.0, -1.0);
            out.push(a);
        }
    }
    out
}

fn candidates() -> Vec<(String, DVector<f64>)> {
    let n_par = DIM * DIM;
    let mut weighted = DVector::zeros(n_par);
    let w = [&SYM3_WEIGHTS[..], &[1.0, 1.0], &SYM3_WEIGHTS[..], &[1.0, 1.0]].concat();
    for (j, x) in w.iter().enumerate() {
        weighted[j] = *x;
    }
    let mut identity = DVector::zeros(n_par);
    for j in 0..DIM {
        identity[j] = 1.0;
    }
    vec![("component multiplicities".into(), weighted), ("identity".into(), identity)]
}

/// Hermitian positive-definite `H` with `H M(k)` anti-Hermitian for every
/// `k`. Since `M` is linear in `k`, the three coordinate directions
/// suffice; the feasible set is a linear space, and a starting candidate
/// is projected onto it.
pub fn find_symmetrizer(basis: &SpatialBasis, params: SymbolParams) -> Result<Symmetrizer> {
    let ms: Vec<DMatrix<C>> =
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].iter().map(|&k| principal_symbol(basis, k, params)).collect();
    let herm = hermitian_basis(DIM);
    let rows = ms.len() * DIM * DIM * 2;
    let mut a = DMatrix::<f64>::zeros(rows, herm.len());
    for (p, b) in herm.iter().enumerate() {
        let mut r = 0;
        for m in &ms {
            let l = b * m + m.adjoint() * b;
            for z in l.iter() {
                a[(r, p)] = z.re;
                a[(r + 1, p)] = z.im;
                r += 2;
            }
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let smax = svd.singular_values.max();
    let null: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= 1e-10 * smax)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    // singular values of a tall matrix: columns beyond the row count are null
    let null = if vt.nrows() > svd.singular_values.len() {
        let mut v = null;
        for i in svd.singular_values.len()..vt.nrows() {
            v.push(vt.row(i).transpose());
        }
        v
    } else {
        null
    };
    for (name, h0) in candidates() {
        let mut coords = DVector::<f64>::zeros(herm.len());
        for v in &null {
            coords += v * v.dot(&h0);
        }
        let mut h = DMatrix::<C>::zeros(DIM, DIM);
        for (c, b) in coords.iter().zip(&herm) {
            h += b * C::new(*c, 0.0);
        }
        let scale = h[(0, 0)].re;
        if scale.abs() < 1e-12 {
            continue;
        }
        h /= C::new(scale, 0.0);
        // clean round-off so H is exactly Hermitian
        let h = (&h + h.adjoint()) * C::new(0.5, 0.0);
        let mut spectrum: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        spectrum.sort_by(f64::total_cmp);
        if spectrum[0] > 1e-8 {
            return Ok(Symmetrizer { h, spectrum, candidate: name });
        }
    }
    Err(Error::Numerical("no positive-definite symmetrizer found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speeds_along_z() {
        let s = characteristic_speeds(&SpatialBasis::default(), [0.0, 0.0, 1.0], SymbolParams::default()).unwrap();
        let set = speed_set(&s, 1e-9);
        let vals: Vec<(f64, usize)> = set.iter().map(|(v, n)| ((v * 3.0).round() / 3.0, *n)).collect();
        assert_eq!(vals, vec![(-1.0, 2), (-1.0 / 3.0, 4), (1.0 / 3.0, 4), (1.0, 2)]);
    }

    #[test]
    fn symbol_is_homogeneous() {
        let b = SpatialBasis::default();
        let m1 = principal_symbol(&b, [0.2, -0.5, 0.7], SymbolParams::default());
        let m2 = principal_symbol(&b, [0.4, -1.0, 1.4], SymbolParams::default());
        assert!((m2 - m1 * C::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn symmetrizer_exists() {
        let b = SpatialBasis::default();
        let s = find_symmetrizer(&b, SymbolParams::default()).unwrap();
        assert!(s.spectrum[0] > 0.0);
        let m = principal_symbol(&b, [0.3, 0.4, -0.2], SymbolParams::default());
        assert!(symmetrizer_residual(&s.h, &m) < 1e-12);
    }
}
