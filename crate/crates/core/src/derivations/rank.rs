//! Linear-algebra test behind the conclusions check: for a condition that
//! is bilinear in a probe field and a set of unknown fields, demanding it
//! for every basis value of the probe leaves how many unknown components
//! free?

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ir::coeff::Coeff;
use crate::ir::components::{components, JetKey};
use crate::ir::registry::{registry, SymbolId};
use crate::ir::Expression;

/// Independent components of a symbol, as normalized jet keys.
pub fn independent_components(id: SymbolId) -> BTreeSet<JetKey> {
    let s = registry().get(id);
    let n = s.n_unprimed + s.n_primed;
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let bits: Vec<u8> = (0..n).map(|k| ((mask >> k) & 1) as u8).collect();
        let mut unp = bits[..s.n_unprimed].to_vec();
        let mut pri = bits[s.n_unprimed..].to_vec();
        for g in &s.sym_unprimed {
            let mut sub: Vec<u8> = g.iter().map(|&k| unp[k]).collect();
            sub.sort_unstable();
            for (k, v) in g.iter().zip(sub) {
                unp[*k] = v;
            }
        }
        for g in &s.sym_primed {
            let mut sub: Vec<u8> = g.iter().map(|&k| pri[k]).collect();
            sub.sort_unstable();
            for (k, v) in g.iter().zip(sub) {
                pri[*k] = v;
            }
        }
        out.insert(JetKey { symbol: id, derivs: vec![], unp, pri });
    }
    out
}

/// Rank of a matrix over Q(i, √2).
pub fn rank(mut rows: Vec<Vec<Coeff>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].inv().expect("nonzero");
        for i in r + 1..rows.len() {
            if !rows[i][c].is_zero() {
                let f = rows[i][c] * inv;
                for j in c..ncols {
                    let v = rows[r][j];
                    rows[i][j] = rows[i][j] - f * v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Number of unknown components left undetermined when `cond` must vanish
/// for every basis value of `probe`. Constant symbols (m, e) count as
/// nonzero scalars.
pub fn forced_nullity(cond: &Expression, probe: SymbolId, unknowns: &[SymbolId]) -> Result<usize> {
    let cols: Vec<JetKey> = unknowns.iter().flat_map(|&u| independent_components(u)).collect();
    let col_of: BTreeMap<&JetKey, usize> = cols.iter().enumerate().map(|(k, j)| (j, k)).collect();
    let mut rows: BTreeMap<(Vec<u8>, JetKey), Vec<Coeff>> = BTreeMap::new();
    for ((comp, mono), c) in components(cond) {
        let mut p = None;
        let mut u = None;
        for j in &mono {
            if j.symbol == probe && j.derivs.is_empty() {
                p = Some(j.clone());
            } else if let Some(&k) = col_of.get(j) {
                u = Some(k);
            } else if !registry().get(j.symbol).constant {
                return Err(Error::Unsupported(format!(
                    "condition is not bilinear: stray {}",
                    registry().get(j.symbol).name
                )));
            }
        }
        let (Some(p), Some(u)) = (p, u) else {
            return Err(Error::Unsupported("condition is not bilinear in probe and unknowns".into()));
        };
        let row = rows.entry((comp, p)).or_insert_with(|| vec![Coeff::zero(); cols.len()]);
        row[u] += c;
    }
    Ok(cols.len() - rank(rows.into_values().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse;
    use crate::ir::registry::sym;

    #[test]
    fn component_counts() {
        assert_eq!(independent_components(sym("tau", 1, 2)).len(), 6);
        assert_eq!(independent_components(sym("Phi", 2, 2)).len(), 9);
        assert_eq!(independent_components(sym("F", 0, 2)).len(), 3);
    }

    #[test]
    fn nullity_counts_unprobed_unknowns() {
        let c = parse("F_{A' B'} tau_{A}^{A' B'}").unwrap();
        assert_eq!(forced_nullity(&c, sym("tau", 1, 2), &[sym("F", 0, 2)]).unwrap(), 0);
        let c = parse("F_{A B} tau^{B}").unwrap();
        assert_eq!(forced_nullity(&c, sym("tau", 1, 0), &[sym("F", 2, 0)]).unwrap(), 0);
        let c = parse("Phi_{A B A' B'} tau^{B A' B'}").unwrap();
        assert_eq!(forced_nullity(&c, sym("tau", 1, 2), &[sym("Phi", 2, 2), sym("F", 0, 2)]).unwrap(), 3);
    }
}
