//! Space-spinor split with a covariantly constant frame `t^{AA'}`,
//! normalized so that `t_{AA'} t^{BA'} = ε_A^B`.
//!
//! Every primed index `X'` is converted to an unprimed one by contraction
//! with `t^{X'}_C`. This map preserves ε, so contractions survive with
//! sign +1. Fields and operators are replaced by their space-spinor parts:
//!
//! ```text
//! t^{A'}_B ∇_{AA'}            = ε_{AB} ∂ + ∂_{AB}
//! t^{A'}_C t^{B'}_B τ_{AA'B'} = t_{ABC} + ε_{AC} t_B + ε_{AB} t_C
//! t^{A'}_C σ_{A'AB}           = s_{ABC} + ε_{CA} s_B + ε_{CB} s_A
//! σ_{A'} t^{A'}_A             = σ_A
//! t^{A'}_B t_{AA'}            = ε_{AB}
//! t^{A'}_A t^{B'}_B ε_{A'B'}  = ε_{AB}
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ir::expr::{Base, Deriv, DerivOp, Expression, Factor, Term};
use crate::ir::index::{Index, LabelSupply};
use crate::ir::ops::{differentiate, instantiate};
use crate::ir::parse;
use crate::ir::registry::registry;

#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub flat: bool,
}

impl Default for Frame {
    fn default() -> Self {
        Frame { flat: true }
    }
}

/// Template for a bare field with all slots converted (unprimed slots
/// first, then the converted primed ones), written with down indices.
fn field_template(name: &str, nu: usize, np: usize) -> Option<(&'static str, &'static [&'static str])> {
    Some(match (name, nu, np) {
        ("tau", 1, 2) => ("t_{A B C} + eps_{A C} t_{B} + eps_{A B} t_{C}", &["A", "C", "B"]),
        ("sigma", 2, 1) => ("s_{A B C} + eps_{C A} s_{B} + eps_{C B} s_{A}", &["A", "B", "C"]),
        ("sigma", 0, 1) => ("sigma_{A}", &["A"]),
        ("chi", 0, 1) => ("chi_{A}", &["A"]),
        ("t", 1, 1) => ("eps_{A B}", &["A", "B"]),
        _ => return None,
    })
}

fn convert(i: &Index, map: &BTreeMap<String, String>) -> Index {
    if i.primed {
        Index::new(map[&i.label].clone(), false, i.up)
    } else {
        i.clone()
    }
}

fn split_factor(f: &Factor, map: &BTreeMap<String, String>) -> Result<Expression> {
    let unp: Vec<Index> = f.unp.iter().map(|i| convert(i, map)).collect();
    let pri: Vec<Index> = f.pri.iter().map(|i| convert(i, map)).collect();
    let mut e = match f.base {
        Base::Eps => {
            let all: Vec<Index> = unp.into_iter().chain(pri).collect();
            Expression::from_factor(Factor::eps(all[0].clone(), all[1].clone()))
        }
        Base::Sym(id) => {
            let s = registry().get(id);
            if s.n_primed == 0 {
                Expression::from_factor(Factor::field(id, unp, vec![]))
            } else {
                let (text, formal) = field_template(s.name, s.n_unprimed, s.n_primed).ok_or_else(|| {
                    Error::Unsupported(format!("no space-spinor split for {}", s.name))
                })?;
                let tpl = parse(text).expect("split template parses");
                let formal: Vec<Index> = formal.iter().map(|l| Index::down(l)).collect();
                let actual: Vec<Index> = unp.into_iter().chain(pri).collect();
                instantiate(&tpl, &formal, &actual)
            }
        }
    };
    for d in f.derivs.iter().rev() {
        e = match d.op {
            DerivOp::Dt | DerivOp::DS => differentiate(&e, d),
            DerivOp::Nabla => {
                let a = d.unp[0].clone();
                let b = convert(&d.pri[0], map);
                let dt = differentiate(&e, &Deriv::new(DerivOp::Dt, vec![], vec![]))
                    .mul(&Expression::from_factor(Factor::eps(a.clone(), b.clone())));
                let ds = differentiate(&e, &Deriv::new(DerivOp::DS, vec![a, b], vec![]));
                dt.add(&ds)
            }
            DerivOp::BoxU | DerivOp::BoxP => {
                return Err(Error::Unsupported("curvature derivation in a flat split".into()))
            }
        };
    }
    Ok(e)
}

/// Split `e`. Free primed labels are renamed according to `free_map`
/// (primed label → unprimed label, both written without primes); a free
/// primed label not listed keeps its letter.
pub fn space_split(e: &Expression, frame: Frame, free_map: &[(&str, &str)]) -> Result<Expression> {
    if !frame.flat {
        return Err(Error::Unsupported("space-spinor split requires a flat frame".into()));
    }
    let e = crate::ir::ops::expand_projectors(e);
    let mut out = Expression::zero();
    for t in &e.terms {
        let unprimed: BTreeSet<String> =
            t.all_indices().filter(|i| !i.primed).map(|i| i.label.clone()).collect();
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        let mut used = unprimed.clone();
        for i in t.free_indices().iter().filter(|i| i.primed) {
            let target = free_map
                .iter()
                .find(|(p, _)| *p == i.label)
                .map(|(_, u)| u.to_string())
                .unwrap_or_else(|| i.label.clone());
            if !used.insert(target.clone()) {
                return Err(Error::LabelCollision(format!("{target} already used in split")));
            }
            map.insert(i.label.clone(), target);
        }
        let mut supply = LabelSupply::avoiding(used.iter().map(String::as_str));
        for (p, l) in t.dummy_labels() {
            if p {
                let fresh = supply.fresh();
                map.insert(l, fresh);
            }
        }
        let mut acc = Expression::from_term(Term::scalar(t.coeff));
        for f in &t.factors {
            acc = acc.mul(&split_factor(f, &map)?);
        }
        out = out.add(&acc);
    }
    if out.terms.iter().any(|t| t.all_indices().any(|i| i.primed)) {
        return Err(Error::IllFormed("primed index survived the split".into()));
    }
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::equal;

    #[test]
    fn unprimed_expression_unchanged() {
        let e = parse("dS_{A B} t^{B} + m s_{A}").unwrap();
        assert!(equal(&space_split(&e, Frame::default(), &[]).unwrap(), &e).unwrap());
    }

    #[test]
    fn primed_eps_converts_to_unprimed() {
        let e = parse("eps_{A' B'}").unwrap();
        let s = space_split(&e, Frame::default(), &[("A", "C"), ("B", "D")]).unwrap();
        assert!(equal(&s, &parse("eps_{C D}").unwrap()).unwrap());
    }

    #[test]
    fn nabla_splits_into_time_and_space_parts() {
        let e = parse("nabla_{A A'} tau_{B}").unwrap();
        let s = space_split(&e, Frame::default(), &[("A", "C")]).unwrap();
        assert!(equal(&s, &parse("eps_{A C} dt tau_{B} + dS_{A C} tau_{B}").unwrap()).unwrap());
    }

    #[test]
    fn contraction_survives() {
        let e = parse("nabla_{A A'} sigma^{A'}").unwrap();
        let s = space_split(&e, Frame::default(), &[]).unwrap();
        assert!(equal(&s, &parse("-dt sigma_{A} + dS_{A B} sigma^{B}").unwrap()).unwrap());
    }

    #[test]
    fn curved_frame_rejected() {
        let e = parse("tau_{A}").unwrap();
        assert!(space_split(&e, Frame { flat: false }, &[]).is_err());
    }
}
