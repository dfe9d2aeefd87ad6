//! Action of the curvature derivations □_{AB}, □_{A'B'} from the rule table,
//! complex conjugation and specialization of backgrounds.

use std::collections::BTreeSet;

use super::table::RuleTable;
use crate::error::{Error, Result};
use crate::ir::expr::{Base, DerivOp, Expression, Factor, Term};
use crate::ir::index::{Index, LabelSupply};
use crate::ir::ops::{differentiate, instantiate, instantiate_traced};
use crate::ir::parse::{parse_in, Scope};
use crate::ir::registry::registry;

/// Resolves `FIELD[idx]` inside a template to the operand with one slot
/// replaced by `idx`.
struct SlotScope<'a> {
    operand: &'a Factor,
    slot: usize,
}

impl Scope for SlotScope<'_> {
    fn definition(&self, name: &str, indices: &[Index]) -> Option<Result<Expression>> {
        if name != "FIELD" {
            return None;
        }
        if indices.len() != 1 {
            return Some(Err(Error::Table("`@` takes exactly one index".into())));
        }
        let mut f = self.operand.clone();
        let slot = f.slots_mut().nth(self.slot).expect("slot in range");
        if slot.primed != indices[0].primed {
            return Some(Err(Error::Table("`@` index has the wrong chirality".into())));
        }
        *slot = indices[0].clone();
        Some(Ok(Expression::from_factor(f)))
    }
}

fn template(table: &RuleTable, key: &str, operand: &Factor, slot: usize) -> Result<Expression> {
    let text = table.get(key)?.replace('@', "FIELD");
    parse_in(&text, &SlotScope { operand, slot }).map_err(|e| Error::Table(format!("{key}: {e}")))
}

/// Expansion of `□ operand` where every slot of `g` carries a distinct
/// lowered label and the box is `g.derivs[0]`.
fn expand_outer_box(g: &Factor, table: &RuleTable) -> Result<Expression> {
    let bx = &g.derivs[0];
    let primed_box = bx.op == DerivOp::BoxP;
    let box_idx: Vec<Index> = if primed_box { bx.pri.clone() } else { bx.unp.clone() };
    let operand = Factor { derivs: g.derivs[1..].to_vec(), ..g.clone() };
    let uncharged_const = match operand.base {
        Base::Eps => true,
        Base::Sym(id) => registry().get(id).constant,
    };
    if uncharged_const {
        return Ok(Expression::zero());
    }
    let bname = if primed_box { "primed_box" } else { "unprimed_box" };
    let formal_box = [Index::new("X", primed_box, false), Index::new("Y", primed_box, false)];
    let mut out = Expression::zero();
    let slots: Vec<Index> = operand.slots().cloned().collect();
    for (k, s) in slots.iter().enumerate() {
        let key = format!("{bname}.{}_slot", if s.primed { "primed" } else { "unprimed" });
        let e = template(table, &key, &operand, k)?;
        let formal = [formal_box[0].clone(), formal_box[1].clone(), Index::new("Z", s.primed, false)];
        let actual = [box_idx[0].clone(), box_idx[1].clone(), s.clone()];
        out = out.add(&instantiate(&e, &formal, &actual));
    }
    if let Base::Sym(id) = operand.base {
        if registry().get(id).charged {
            let key = format!("charge.{bname}");
            let c = crate::ir::parse(table.get(&key)?).map_err(|e| Error::Table(format!("{key}: {e}")))?;
            let c = instantiate(&c, &formal_box, &box_idx);
            out = out.add(&c.mul(&Expression::from_factor(operand.clone())));
        }
    }
    Ok(out)
}

/// Replace one factor containing □ by its expansion. Operators outside the
/// innermost □ are reapplied with the Leibniz rule.
pub fn expand_box_factor(f: &Factor, table: &RuleTable) -> Result<Expression> {
    let Some(k) = f.derivs.iter().rposition(|d| d.op.is_box()) else {
        return Ok(Expression::from_factor(f.clone()));
    };
    // distinct lowered labels avoiding template letters
    let mut supply = LabelSupply::avoiding(["X", "Y", "Z", "D"]);
    for i in f.slots() {
        supply.reserve(&i.label);
    }
    let mut g = f.clone();
    let mut formal = vec![];
    let mut actual = vec![];
    for i in g.slots_mut() {
        actual.push(i.clone());
        *i = Index::new(supply.fresh(), i.primed, false);
        formal.push(i.clone());
    }
    let inner = Factor { derivs: g.derivs[k..].to_vec(), ..g.clone() };
    let mut e = expand_outer_box(&inner, table)?;
    for d in g.derivs[..k].iter().rev() {
        e = differentiate(&e, d);
    }
    // any further □ left outside
    let e = expand_box(&e, table)?;
    Ok(instantiate_traced(&e, &formal, &actual, &BTreeSet::new()))
}

/// Replace every □ factor by its rule-table expansion.
pub fn expand_box(e: &Expression, table: &RuleTable) -> Result<Expression> {
    let mut out = Expression::zero();
    for t in &e.terms {
        let Some(fi) = t.factors.iter().position(|f| f.derivs.iter().any(|d| d.op.is_box())) else {
            out.terms.push(t.clone());
            continue;
        };
        let rest = Term { factors: [&t.factors[..fi], &t.factors[fi + 1..]].concat(), ..t.clone() };
        let x = expand_box_factor(&t.factors[fi], table)?;
        let prod = Expression::from_term(rest).mul(&x);
        out = out.add(&expand_box(&prod, table)?);
    }
    Ok(out)
}

/// Drop every term containing one of the named symbols (any shape).
pub fn specialize_zero(e: &Expression, names: &[&str]) -> Expression {
    let set: BTreeSet<&str> = names.iter().copied().collect();
    Expression {
        terms: e
            .terms
            .iter()
            .filter(|t| !t.factors.iter().any(|f| !f.is_eps() && set.contains(f.name())))
            .cloned()
            .collect(),
    }
}

/// Flat uncharged background: Ψ = Φ = Λ = F = 0.
pub const FLAT_BACKGROUND: [&str; 4] = ["Psi", "Phi", "Lambda", "F"];

/// Complex conjugate: chiralities swap, symbols map to their registered
/// conjugates and coefficients are conjugated.
pub fn conjugate(e: &Expression) -> Result<Expression> {
    let flip = |v: &[Index]| -> Vec<Index> { v.iter().map(|i| Index::new(&i.label, !i.primed, i.up)).collect() };
    let mut out = Expression::zero();
    for t in &e.terms {
        let mut nt = Term { coeff: t.coeff.conj(), factors: vec![], projectors: vec![] };
        for f in &t.factors {
            let base = match f.base {
                Base::Eps => Base::Eps,
                Base::Sym(id) => Base::Sym(registry().conjugate_of(id).ok_or_else(|| {
                    Error::Unsupported(format!("no conjugate registered for {}", registry().get(id).name))
                })?),
            };
            let mut derivs = vec![];
            for d in &f.derivs {
                let op = match d.op {
                    DerivOp::Nabla => DerivOp::Nabla,
                    DerivOp::BoxU => DerivOp::BoxP,
                    DerivOp::BoxP => DerivOp::BoxU,
                    _ => return Err(Error::Unsupported("conjugate of a space-spinor derivative".into())),
                };
                derivs.push(crate::ir::Deriv::new(op, flip(&d.pri), flip(&d.unp)));
            }
            nt.factors.push(Factor { base, derivs, unp: flip(&f.pri), pri: flip(&f.unp) });
        }
        for p in &t.projectors {
            let mut q = p.clone();
            for l in &mut q.labels {
                l.0 = !l.0;
            }
            nt.projectors.push(q);
        }
        out.terms.push(nt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{equal, parse};

    #[test]
    fn uncharged_scalar_and_constants_vanish() {
        let t = RuleTable::default();
        assert!(expand_box(&parse("boxU_{A B} Lambda").unwrap(), &t).unwrap().is_zero());
        assert!(expand_box(&parse("boxU_{A B} m").unwrap(), &t).unwrap().is_zero());
    }

    #[test]
    fn charged_scalar_gets_pure_charge_term() {
        let t = RuleTable::default();
        let e = expand_box(&parse("boxU_{A B} psi").unwrap(), &t).unwrap();
        assert!(equal(&e, &parse("-i e F_{A B} psi").unwrap()).unwrap());
    }

    #[test]
    fn flat_charged_action_on_spinor() {
        let t = RuleTable::default();
        let e = expand_box(&parse("boxU_{A B} tau_{C}").unwrap(), &t).unwrap();
        let e = specialize_zero(&e, &["Psi", "Phi", "Lambda"]);
        assert!(equal(&e, &parse("-i e F_{A B} tau_{C}").unwrap()).unwrap());
    }

    #[test]
    fn raised_slot_is_handled() {
        let t = RuleTable::default();
        let up = expand_box(&parse("boxU_{A B} tau^{C}").unwrap(), &t).unwrap();
        let down = expand_box(&parse("boxU_{A B} tau_{D}").unwrap(), &t).unwrap();
        let raised = parse("eps^{C D}").unwrap().mul(&down);
        assert!(equal(&up, &raised).unwrap());
    }

    #[test]
    fn conjugation_is_an_involution() {
        let e = parse("i Phi_{A B A' B'} v^{B B'} + 2 e F_{A B} v^{B}_{A'}").unwrap();
        let cc = conjugate(&conjugate(&e).unwrap()).unwrap();
        assert!(!equal(&conjugate(&e).unwrap(), &e).unwrap());
        assert!(equal(&cc, &e).unwrap());
        assert!(conjugate(&parse("tau_{A}").unwrap()).is_err());
    }
}
