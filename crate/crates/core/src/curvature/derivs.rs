//! Leibniz expansion and reordering of stacked covariant derivatives.

use crate::error::{Error, Result};
use crate::ir::expr::{Deriv, DerivOp, Expression, Factor, Term};
use crate::ir::ops::differentiate;

/// Apply `d` to `e`. A label of `d` may contract with a free index of `e`
/// of opposite variance; reusing a free label with the same variance, or a
/// label twice within `d`, is a collision.
pub fn leibniz_derivative(e: &Expression, d: &Deriv) -> Result<Expression> {
    let mut seen = std::collections::BTreeSet::new();
    for i in d.unp.iter().chain(d.pri.iter()) {
        if !seen.insert((i.primed, i.label.clone())) {
            return Err(Error::LabelCollision(format!("{i} repeated in operator")));
        }
        if e.free_indices().iter().any(|f| f.primed == i.primed && f.label == i.label && f.up == i.up) {
            return Err(Error::LabelCollision(format!("{i} already free in operand")));
        }
    }
    let out = differentiate(e, d);
    out.validate()?;
    Ok(out)
}

/// Order in which stacked ∇s are arranged: operators carrying a label
/// listed earlier (primed labels written with `'`) are moved innermost;
/// operators with no listed label keep their relative order outside.
#[derive(Clone, Debug, Default)]
pub struct NablaOrder {
    pub inner_first: Vec<String>,
}

impl NablaOrder {
    pub fn new(labels: &[&str]) -> Self {
        NablaOrder { inner_first: labels.iter().map(|s| s.to_string()).collect() }
    }

    fn rank(&self, d: &Deriv) -> usize {
        d.unp
            .iter()
            .chain(d.pri.iter())
            .filter_map(|i| {
                let name = if i.primed { format!("{}'", i.label) } else { i.label.clone() };
                self.inner_first.iter().position(|l| *l == name)
            })
            .min()
            .unwrap_or(usize::MAX)
    }

    /// True when the adjacent pair (outer, inner) must be swapped.
    fn swap(&self, outer: &Deriv, inner: &Deriv) -> bool {
        self.rank(outer) < self.rank(inner)
    }
}

/// `∇_a ∇_b X = ∇_b ∇_a X + ε_{AB} □_{A'B'} X + ε_{A'B'} □_{AB} X`
fn swap_at(t: &Term, fi: usize, k: usize) -> Vec<Term> {
    let f = &t.factors[fi];
    let a = f.derivs[k].clone();
    let b = f.derivs[k + 1].clone();
    let rest: Vec<Deriv> = f.derivs[k + 2..].to_vec();
    let outer: Vec<Deriv> = f.derivs[..k].to_vec();
    let with = |mid: Vec<Deriv>| -> Factor {
        let mut g = f.clone();
        g.derivs = outer.iter().cloned().chain(mid).chain(rest.iter().cloned()).collect();
        g
    };
    let mut out = vec![];
    let mut swapped = t.clone();
    swapped.factors[fi] = with(vec![b.clone(), a.clone()]);
    out.push(swapped);
    // ε_{AB} □_{A'B'}
    let mut t1 = t.clone();
    t1.factors[fi] = with(vec![Deriv::new(DerivOp::BoxP, vec![], vec![a.pri[0].clone(), b.pri[0].clone()])]);
    t1.factors.push(Factor::eps(a.unp[0].clone(), b.unp[0].clone()));
    out.push(t1);
    // ε_{A'B'} □_{AB}
    let mut t2 = t.clone();
    t2.factors[fi] = with(vec![Deriv::new(DerivOp::BoxU, vec![a.unp[0].clone(), b.unp[0].clone()], vec![])]);
    t2.factors.push(Factor::eps(a.pri[0].clone(), b.pri[0].clone()));
    out.push(t2);
    out
}

/// Bring every stack of adjacent ∇s into `order`, emitting the □
/// correction for each transposition.
pub fn commute_nablas(e: &Expression, order: &NablaOrder) -> Expression {
    let mut work: Vec<Term> = e.terms.clone();
    let mut done: Vec<Term> = vec![];
    while let Some(t) = work.pop() {
        let mut hit = None;
        'search: for (fi, f) in t.factors.iter().enumerate() {
            for k in 0..f.derivs.len().saturating_sub(1) {
                let (o, i) = (&f.derivs[k], &f.derivs[k + 1]);
                if o.op == DerivOp::Nabla && i.op == DerivOp::Nabla && order.swap(o, i) {
                    hit = Some((fi, k));
                    break 'search;
                }
            }
        }
        match hit {
            Some((fi, k)) => work.extend(swap_at(&t, fi, k)),
            None => done.push(t),
        }
    }
    done.reverse();
    Expression { terms: done }
}
