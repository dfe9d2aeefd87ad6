//! Structural operations on expressions that do not need the rule table.

use std::collections::{BTreeMap, BTreeSet};

use super::coeff::Coeff;
use super::expr::{Deriv, Expression, Factor, Projector, Term};
use super::index::{Index, LabelSupply};

/// Apply a derivative operator to every term with the Leibniz rule.
///
/// Dummies of the operand that clash with the operator's labels are renamed;
/// free labels shared with the operator contract with it.
pub fn differentiate(e: &Expression, d: &Deriv) -> Expression {
    let dlabels: BTreeSet<String> =
        d.unp.iter().chain(d.pri.iter()).map(|i| i.label.clone()).collect();
    // a symmetrized label contracted with the operator stops being free
    let touches = e.terms.iter().any(|t| {
        t.projectors.iter().any(|p| p.labels.iter().any(|(_, l)| dlabels.contains(l)))
    });
    let expanded;
    let e = if touches {
        expanded = expand_projectors(e);
        &expanded
    } else {
        e
    };
    let mut out = Expression::zero();
    for t in &e.terms {
        let mut t = t.clone();
        t.freshen_dummies(&dlabels);
        for k in 0..t.factors.len() {
            if t.factors[k].is_constant() {
                continue;
            }
            let mut nt = t.clone();
            nt.factors[k].derivs.insert(0, d.clone());
            out.terms.push(nt);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Permutations of `0..n` paired with their parity sign.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, i128)> {
    permutations(n)
        .into_iter()
        .map(|p| {
            let mut inv = 0;
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            (p, if inv % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

fn expand_projector(t: &Term, p: &Projector) -> Vec<Term> {
    let n = p.labels.len();
    let perms = signed_permutations(n);
    let norm = Coeff::frac(1, perms.len() as i128);
    let mut out = vec![];
    for (perm, sign) in perms {
        let mut map = BTreeMap::new();
        for (i, &j) in perm.iter().enumerate() {
            if i != j {
                map.insert(p.labels[i].clone(), p.labels[j].1.clone());
            }
        }
        let mut nt = t.clone();
        nt.relabel(&map);
        let s = if p.anti { Coeff::int(sign) } else { Coeff::one() };
        nt.coeff = nt.coeff * norm * s;
        out.push(nt);
    }
    out
}

/// Replace every (anti)symmetrizer by its explicit permutation sum.
pub fn expand_projectors(e: &Expression) -> Expression {
    let mut out = Expression::zero();
    for t in &e.terms {
        let mut work = vec![Term { projectors: vec![], ..t.clone() }];
        for p in &t.projectors {
            work = work.iter().flat_map(|w| expand_projector(w, p)).collect();
        }
        out.terms.extend(work);
    }
    out
}

/// Multiply by an ε that moves a free index to the requested variance.
/// `ξ^A = ε^{AB} ξ_B` and `ξ_A = ξ^B ε_{BA}`.
pub fn set_variance(e: &Expression, target: &Index) -> Expression {
    let mut supply = LabelSupply::avoiding(e.labels().iter().map(String::as_str));
    supply.reserve(&target.label);
    let tmp = supply.fresh();
    let mut map = BTreeMap::new();
    map.insert((target.primed, target.label.clone()), tmp.clone());
    let renamed = e.relabel(&map);
    let current_up = !target.up;
    let eps = if current_up {
        // ξ_A = ξ^B ε_{BA}
        Factor::eps(Index::new(&tmp, target.primed, false), Index::new(&target.label, target.primed, false))
    } else {
        // ξ^A = ε^{AB} ξ_B
        Factor::eps(Index::new(&target.label, target.primed, true), Index::new(&tmp, target.primed, true))
    };
    renamed.mul(&Expression::from_factor(eps))
}

/// Instantiate an expression whose free indices are `formal` at the
/// `actual` indices, raising or lowering where the variances differ.
pub fn instantiate(e: &Expression, formal: &[Index], actual: &[Index]) -> Expression {
    assert_eq!(formal.len(), actual.len());
    let actual_labels: BTreeSet<String> = actual.iter().map(|i| i.label.clone()).collect();
    let mut work = e.clone();
    for t in &mut work.terms {
        t.freshen_dummies(&actual_labels);
    }
    // two-stage rename through temporaries so permutations of labels work
    let mut supply = LabelSupply::avoiding(
        work.labels().iter().chain(actual_labels.iter()).map(String::as_str),
    );
    let tmps: Vec<String> = formal.iter().map(|_| supply.fresh()).collect();
    let mut m1 = BTreeMap::new();
    for (f, t) in formal.iter().zip(&tmps) {
        m1.insert((f.primed, f.label.clone()), t.clone());
    }
    work = work.relabel(&m1);
    let mut m2 = BTreeMap::new();
    for (a, t) in actual.iter().zip(&tmps) {
        m2.insert((a.primed, t.clone()), a.label.clone());
    }
    work = work.relabel(&m2);
    for (f, a) in formal.iter().zip(actual) {
        if f.up != a.up {
            work = set_variance(&work, a);
        }
    }
    work
}

/// `instantiate`, allowing an actual label to repeat (a trace): the second
/// occurrence goes through a fresh label that is renamed back afterwards.
pub fn instantiate_traced(e: &Expression, formal: &[Index], actual: &[Index], avoid: &BTreeSet<String>) -> Expression {
    let mut actual = actual.to_vec();
    let mut supply = LabelSupply::avoiding(avoid.iter().chain(e.labels().iter()).map(String::as_str));
    for i in &actual {
        supply.reserve(&i.label);
    }
    let mut back = BTreeMap::new();
    for k in 0..actual.len() {
        if actual[..k].iter().any(|i| i.primed == actual[k].primed && i.label == actual[k].label) {
            let fresh = supply.fresh();
            back.insert((actual[k].primed, fresh.clone()), actual[k].label.clone());
            actual[k].label = fresh;
        }
    }
    let mut r = instantiate(e, formal, &actual);
    for t in &mut r.terms {
        t.freshen_dummies(avoid);
    }
    r.relabel(&back)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_of_permutations() {
        let p = signed_permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|x| x.1).sum::<i128>(), 0);
    }
}
