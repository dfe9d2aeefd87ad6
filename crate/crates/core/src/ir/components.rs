//! Exact component expansion.
//!
//! Every index is summed over {0, 1} with ε_{01} = +1 and raised indices
//! lowered by ξ^0 = ξ_1, ξ^1 = −ξ_0. Each factor becomes a jet variable whose
//! slots are normalized by the declared symmetries; a pair of covariant
//! derivatives is put into a fixed component order using the commutator
//! `[∇_a, ∇_b] = ε_{AB} □_{A'B'} + ε_{A'B'} □_{AB}`, with the □ jets kept as
//! independent variables. Two expressions agree as polynomials in these
//! variables exactly when they are equal as spinor expressions, which makes
//! this the decision procedure behind zero recognition.

use std::collections::{BTreeMap, BTreeSet};

use super::coeff::Coeff;
use super::expr::{Base, DerivOp, Expression, Factor, Term};
use super::index::Index;
use super::registry::{registry, SymbolId};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetKey {
    pub symbol: SymbolId,
    pub derivs: Vec<(DerivOp, Vec<u8>)>,
    pub unp: Vec<u8>,
    pub pri: Vec<u8>,
}

pub type Monomial = Vec<JetKey>;
pub type ComponentForm = BTreeMap<(Vec<u8>, Monomial), Coeff>;

pub fn eps_value(a: u8, b: u8) -> i128 {
    match (a, b) {
        (0, 1) => 1,
        (1, 0) => -1,
        _ => 0,
    }
}

/// Lowered value and sign of a slot holding component `v`.
fn lower(up: bool, v: u8) -> (u8, i128) {
    if !up {
        (v, 1)
    } else if v == 0 {
        (1, 1)
    } else {
        (0, -1)
    }
}

fn sort_groups(vals: &mut [u8], groups: &[Vec<usize>]) {
    for g in groups {
        let mut sub: Vec<u8> = g.iter().map(|&k| vals[k]).collect();
        sub.sort_unstable();
        for (k, v) in g.iter().zip(sub) {
            vals[*k] = v;
        }
    }
}

/// Normalize derivative prefix: symmetric slots sorted, runs of flat
/// operators sorted.
fn normalize_derivs(derivs: &mut [(DerivOp, Vec<u8>)]) {
    for d in derivs.iter_mut() {
        if d.0.is_symmetric() {
            d.1.sort_unstable();
        }
    }
    let mut k = 0;
    while k < derivs.len() {
        if derivs[k].0.is_flat() {
            let mut j = k;
            while j < derivs.len() && derivs[j].0.is_flat() {
                j += 1;
            }
            derivs[k..j].sort();
            k = j;
        } else {
            k += 1;
        }
    }
}

/// Component value(s) of one factor: list of (integer weight, jet).
/// `None` jet means a pure number (ε).
fn factor_value(f: &Factor, val: &BTreeMap<(bool, &str), u8>) -> Vec<(i128, Option<JetKey>)> {
    let mut sign = 1i128;
    let mut get = |i: &Index| {
        let (v, s) = lower(i.up, val[&(i.primed, i.label.as_str())]);
        sign *= s;
        v
    };
    let unp: Vec<u8> = f.unp.iter().map(&mut get).collect();
    let pri: Vec<u8> = f.pri.iter().map(&mut get).collect();
    let mut derivs: Vec<(DerivOp, Vec<u8>)> = f
        .derivs
        .iter()
        .map(|d| (d.op, d.unp.iter().chain(d.pri.iter()).map(&mut get).collect()))
        .collect();
    let sym = match f.base {
        Base::Eps => {
            if !f.derivs.is_empty() {
                return vec![];
            }
            let (a, b) = if unp.is_empty() { (pri[0], pri[1]) } else { (unp[0], unp[1]) };
            let v = eps_value(a, b) * sign;
            return if v == 0 { vec![] } else { vec![(v, None)] };
        }
        Base::Sym(id) => id,
    };
    let s = registry().get(sym);
    if s.constant && !f.derivs.is_empty() {
        return vec![];
    }
    let mut unp = unp;
    let mut pri = pri;
    sort_groups(&mut unp, &s.sym_unprimed);
    sort_groups(&mut pri, &s.sym_primed);
    normalize_derivs(&mut derivs);
    let is_nabla_pair = derivs.len() == 2 && derivs.iter().all(|d| d.0 == DerivOp::Nabla);
    if is_nabla_pair && derivs[0].1 > derivs[1].1 {
        // ∇_a ∇_b X = ∇_b ∇_a X + ε_{AB} □_{A'B'} X + ε_{A'B'} □_{AB} X
        let a = derivs[0].1.clone();
        let b = derivs[1].1.clone();
        let mut out = vec![];
        let swapped = JetKey {
            symbol: sym,
            derivs: vec![(DerivOp::Nabla, b.clone()), (DerivOp::Nabla, a.clone())],
            unp: unp.clone(),
            pri: pri.clone(),
        };
        out.push((sign, Some(swapped)));
        let e_u = eps_value(a[0], b[0]);
        if e_u != 0 {
            let mut bx = vec![a[1], b[1]];
            bx.sort_unstable();
            out.push((
                sign * e_u,
                Some(JetKey { symbol: sym, derivs: vec![(DerivOp::BoxP, bx)], unp: unp.clone(), pri: pri.clone() }),
            ));
        }
        let e_p = eps_value(a[1], b[1]);
        if e_p != 0 {
            let mut bx = vec![a[0], b[0]];
            bx.sort_unstable();
            out.push((
                sign * e_p,
                Some(JetKey { symbol: sym, derivs: vec![(DerivOp::BoxU, bx)], unp: unp.clone(), pri: pri.clone() }),
            ));
        }
        return out;
    }
    vec![(sign, Some(JetKey { symbol: sym, derivs, unp, pri }))]
}

/// Component form of one term with free indices enumerated in `free` order.
pub fn term_components(t: &Term, free: &[Index]) -> ComponentForm {
    let mut out = ComponentForm::new();
    let labels: BTreeSet<(bool, String)> =
        t.all_indices().map(|i| (i.primed, i.label.clone())).collect();
    let labels: Vec<(bool, String)> = labels.into_iter().collect();
    let n = labels.len();
    let free_pos: Vec<usize> = free
        .iter()
        .map(|i| labels.iter().position(|l| l.0 == i.primed && l.1 == i.label).expect("free label"))
        .collect();
    for mask in 0u32..(1u32 << n) {
        let mut val: BTreeMap<(bool, &str), u8> = BTreeMap::new();
        for (k, l) in labels.iter().enumerate() {
            val.insert((l.0, l.1.as_str()), ((mask >> k) & 1) as u8);
        }
        let comp: Vec<u8> = free_pos.iter().map(|&k| ((mask >> k) & 1) as u8).collect();
        // expand product over factors
        let mut partial: Vec<(i128, Vec<JetKey>)> = vec![(1, vec![])];
        for f in &t.factors {
            let vals = factor_value(f, &val);
            if vals.is_empty() {
                partial.clear();
                break;
            }
            let mut next = Vec::with_capacity(partial.len() * vals.len());
            for (w, mono) in &partial {
                for (fw, jet) in &vals {
                    let mut m = mono.clone();
                    if let Some(j) = jet {
                        m.push(j.clone());
                    }
                    next.push((w * fw, m));
                }
            }
            partial = next;
        }
        for (w, mut mono) in partial {
            mono.sort();
            let entry = out.entry((comp.clone(), mono)).or_insert_with(Coeff::zero);
            *entry += t.coeff * Coeff::int(w);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn components(e: &Expression) -> ComponentForm {
    let free = e.free_indices();
    let mut out = ComponentForm::new();
    for t in &e.terms {
        for (k, c) in term_components(t, &free) {
            *out.entry(k).or_insert_with(Coeff::zero) += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Exact zero test.
pub fn is_zero(e: &Expression) -> bool {
    components(e).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse::parse;

    #[test]
    fn eps_contraction_is_two() {
        let f = components(&parse("eps_{A B} eps^{A B}").unwrap());
        assert_eq!(f.len(), 1);
        assert_eq!(*f.values().next().unwrap(), Coeff::int(2));
    }

    #[test]
    fn schouten_identity_vanishes() {
        let e = parse("eps_{A B} tau_{C} + eps_{B C} tau_{A} + eps_{C A} tau_{B}").unwrap();
        assert!(is_zero(&e));
    }

    #[test]
    fn symmetric_slots_identified() {
        assert!(is_zero(&parse("tau_{A A' B'} - tau_{A B' A'}").unwrap()));
        assert!(!is_zero(&parse("phi_{A A' B} - phi_{B A' A}").unwrap()));
    }

    #[test]
    fn nabla_commutator_normalized() {
        let e = parse(
            "nabla_{A A'} nabla_{B B'} tau_{C} - nabla_{B B'} nabla_{A A'} tau_{C} \
             - eps_{A B} boxP_{A' B'} tau_{C} - eps_{A' B'} boxU_{A B} tau_{C}",
        )
        .unwrap();
        assert!(is_zero(&e));
    }
}
