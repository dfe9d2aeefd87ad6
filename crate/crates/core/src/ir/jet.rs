//! Brute-force numerical evaluation of expressions on jet assignments.
//!
//! This is deliberately independent of the canonicalizer: every index is
//! summed explicitly and each factor is looked up in a table of jet values.
//! In random mode values are drawn from a stream keyed by the jet itself,
//! after sorting declared symmetric slots, so the assignment respects every
//! declared symmetry by construction. Second covariant derivatives are
//! assigned as
//!
//! `∇_a∇_b X = S_ab + ½(ε_{AB} □_{A'B'} X + ε_{A'B'} □_{AB} X)`
//!
//! with `S` symmetric under `a ↔ b`, which makes the commutator identity
//! hold exactly. Values of `□X` come from an optional rule hook (the
//! curvature table) or are independent random jets.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::{Base, Deriv, DerivOp, Expression, Factor, Term};
use super::index::Index;
use super::ops::differentiate;
use super::registry::{registry, SymbolId};
use crate::error::{Error, Result};

/// Replacement of a factor whose outermost operator is □ by its
/// curvature expansion.
pub type BoxRule = Arc<dyn Fn(&Factor) -> Result<Expression> + Send + Sync>;

enum Source {
    Random(u64),
    Explicit(HashMap<(SymbolId, Vec<DerivOp>), Vec<Complex64>>),
}

pub struct JetAssignment {
    source: Source,
    box_rule: Option<BoxRule>,
    cache: HashMap<String, Complex64>,
}

/// Values of an expression for every component of its free indices; the
/// component of `free[k]` is bit `n-1-k` of the position.
#[derive(Clone, Debug)]
pub struct JetValues {
    pub free: Vec<Index>,
    pub values: Vec<Complex64>,
}

impl JetValues {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &JetValues) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn eps(a: u8, b: u8) -> f64 {
    match (a, b) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

/// Lowered component and sign for a raw component of an index.
fn lower(up: bool, v: u8) -> (u8, f64) {
    match (up, v) {
        (false, v) => (v, 1.0),
        (true, 0) => (1, 1.0),
        (true, _) => (0, -1.0),
    }
}

/// Flat slot layout of a factor: derivative slots outermost first, then
/// unprimed, then primed slots.
fn flat_len(f: &Factor) -> usize {
    f.slots().count()
}

impl JetAssignment {
    pub fn random(seed: u64) -> Self {
        JetAssignment { source: Source::Random(seed), box_rule: None, cache: HashMap::new() }
    }

    pub fn with_box_rule(mut self, rule: BoxRule) -> Self {
        self.box_rule = Some(rule);
        self
    }

    pub fn explicit() -> Self {
        JetAssignment { source: Source::Explicit(HashMap::new()), box_rule: None, cache: HashMap::new() }
    }

    /// Set the full lowered component array of a jet (bit order as in
    /// [`JetValues`], derivative slots first). Rejects arrays that violate a
    /// declared symmetry.
    pub fn set(&mut self, symbol: SymbolId, ops: &[DerivOp], values: Vec<Complex64>) -> Result<()> {
        let s = registry().get(symbol);
        let dslots: usize = ops.iter().map(|o| o.shape().0 + o.shape().1).sum();
        let n = dslots + s.n_unprimed + s.n_primed;
        if values.len() != 1 << n {
            return Err(Error::SymmetryViolation(format!("{} needs {} components", s.name, 1 << n)));
        }
        let mut groups: Vec<Vec<usize>> = vec![];
        let mut off = 0;
        for o in ops {
            let (u, p) = o.shape();
            if o.is_symmetric() {
                groups.push(vec![off, off + 1]);
            }
            off += u + p;
        }
        for g in &s.sym_unprimed {
            groups.push(g.iter().map(|k| k + dslots).collect());
        }
        for g in &s.sym_primed {
            groups.push(g.iter().map(|k| k + dslots + s.n_unprimed).collect());
        }
        for pos in 0..values.len() {
            let bits: Vec<u8> = (0..n).map(|k| ((pos >> (n - 1 - k)) & 1) as u8).collect();
            let mut sorted = bits.clone();
            for g in &groups {
                let mut sub: Vec<u8> = g.iter().map(|&k| bits[k]).collect();
                sub.sort_unstable();
                for (k, v) in g.iter().zip(sub) {
                    sorted[*k] = v;
                }
            }
            let p2 = sorted.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
            if (values[pos] - values[p2]).norm() > 1e-12 {
                return Err(Error::SymmetryViolation(format!("{} component {:?}", s.name, bits)));
            }
        }
        match &mut self.source {
            Source::Explicit(m) => {
                m.insert((symbol, ops.to_vec()), values);
                Ok(())
            }
            Source::Random(_) => Err(Error::Unsupported("explicit values in random mode".into())),
        }
    }

    fn random_value(&mut self, key: String) -> Complex64 {
        let Source::Random(seed) = self.source else { unreachable!() };
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(&key));
        let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        self.cache.insert(key, v);
        v
    }

    /// Value of a factor whose slots (in flat layout) carry the given
    /// lowered components.
    fn factor_lowered(&mut self, f: &Factor, vals: &[u8]) -> Result<Complex64> {
        let Base::Sym(id) = f.base else {
            let v = eps(vals[0], vals[1]);
            return Ok(if f.derivs.is_empty() { Complex64::new(v, 0.0) } else { Complex64::new(0.0, 0.0) });
        };
        let s = registry().get(id);
        if s.constant && !f.derivs.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if let Source::Explicit(m) = &self.source {
            let ops: Vec<DerivOp> = f.derivs.iter().map(|d| d.op).collect();
            let arr = m.get(&(id, ops)).ok_or_else(|| {
                Error::MissingJet(format!("{} with {} derivative(s)", s.name, f.derivs.len()))
            })?;
            let pos = vals.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
            return Ok(arr[pos]);
        }
        // box outermost anywhere in the prefix: expand via the rule hook
        if let Some(k) = f.derivs.iter().position(|d| d.op.is_box()) {
            if self.box_rule.is_some() {
                return self.expand_and_eval(f, k, vals);
            }
        }
        let nd = f.derivs.len();
        if nd == 2 && f.derivs.iter().all(|d| d.op == DerivOp::Nabla) {
            return self.second_nabla(f, id, vals);
        }
        Ok(self.plain_jet(id, f, vals))
    }

    fn plain_jet(&mut self, id: SymbolId, f: &Factor, vals: &[u8]) -> Complex64 {
        let s = registry().get(id);
        let mut v = vals.to_vec();
        let mut off = 0;
        let mut dparts: Vec<(DerivOp, Vec<u8>)> = vec![];
        for d in &f.derivs {
            let (u, p) = d.op.shape();
            let mut part = v[off..off + u + p].to_vec();
            if d.op.is_symmetric() {
                part.sort_unstable();
            }
            dparts.push((d.op, part));
            off += u + p;
        }
        // runs of flat operators commute
        let mut k = 0;
        while k < dparts.len() {
            if dparts[k].0.is_flat() {
                let mut j = k;
                while j < dparts.len() && dparts[j].0.is_flat() {
                    j += 1;
                }
                dparts[k..j].sort();
                k = j;
            } else {
                k += 1;
            }
        }
        let (fu, fp) = v.split_at_mut(off).1.split_at_mut(s.n_unprimed);
        for g in &s.sym_unprimed {
            let mut sub: Vec<u8> = g.iter().map(|&k| fu[k]).collect();
            sub.sort_unstable();
            for (k, x) in g.iter().zip(sub) {
                fu[*k] = x;
            }
        }
        for g in &s.sym_primed {
            let mut sub: Vec<u8> = g.iter().map(|&k| fp[k]).collect();
            sub.sort_unstable();
            for (k, x) in g.iter().zip(sub) {
                fp[*k] = x;
            }
        }
        let key = format!("{id}|{dparts:?}|{fu:?}|{fp:?}");
        self.random_value(key)
    }

    fn second_nabla(&mut self, f: &Factor, id: SymbolId, vals: &[u8]) -> Result<Complex64> {
        let (a, ap, b, bp) = (vals[0], vals[1], vals[2], vals[3]);
        let rest = &vals[4..];
        // symmetric part keyed on the unordered pair of derivative slots
        let mut pair = [(a, ap), (b, bp)];
        pair.sort_unstable();
        let mut sym_vals = vec![pair[0].0, pair[0].1, pair[1].0, pair[1].1];
        sym_vals.extend_from_slice(rest);
        let s_part = self.plain_jet(id, f, &sym_vals);
        let mut total = s_part;
        let bare = Factor { derivs: vec![], ..f.clone() };
        let e_u = eps(a, b);
        if e_u != 0.0 {
            let mut bf = bare.clone();
            bf.derivs.insert(0, Deriv::new(DerivOp::BoxP, vec![], vec![Index::down_p("X1"), Index::down_p("X2")]));
            let mut v = vec![ap, bp];
            v.extend_from_slice(rest);
            total += 0.5 * e_u * self.factor_lowered(&bf, &v)?;
        }
        let e_p = eps(ap, bp);
        if e_p != 0.0 {
            let mut bf = bare;
            bf.derivs.insert(0, Deriv::new(DerivOp::BoxU, vec![Index::down("X1"), Index::down("X2")], vec![]));
            let mut v = vec![a, b];
            v.extend_from_slice(rest);
            total += 0.5 * e_p * self.factor_lowered(&bf, &v)?;
        }
        Ok(total)
    }

    /// Replace the □ at position `k` of the prefix using the rule hook,
    /// reapply the outer operators and evaluate at fixed components.
    fn expand_and_eval(&mut self, f: &Factor, k: usize, vals: &[u8]) -> Result<Complex64> {
        // canonical labels Z1.. on every slot, all down
        let mut g = f.clone();
        let mut n = 0;
        for i in g.slots_mut() {
            n += 1;
            *i = Index::new(format!("Z{n}"), i.primed, false);
        }
        let key = format!("box|{g:?}|{vals:?}");
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let inner = Factor { derivs: g.derivs[k..].to_vec(), ..g.clone() };
        let rule = self.box_rule.clone().expect("rule present");
        let mut e = rule(&inner)?;
        for d in g.derivs[..k].iter().rev() {
            e = differentiate(&e, d);
        }
        let e = super::ops::expand_projectors(&e);
        let free: Vec<Index> = g.slots().cloned().collect();
        let v = self.eval_at(&e, &free, vals)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Evaluate `e` with the given (lowered, all down) free indices fixed.
    fn eval_at(&mut self, e: &Expression, free: &[Index], vals: &[u8]) -> Result<Complex64> {
        let mut fixed: HashMap<(bool, String), u8> = HashMap::new();
        for (i, v) in free.iter().zip(vals) {
            fixed.insert((i.primed, i.label.clone()), *v);
        }
        let mut total = Complex64::new(0.0, 0.0);
        for t in &e.terms {
            total += self.term_sum(t, &fixed)?;
        }
        Ok(total)
    }

    /// Sum of a term over its dummies with free labels fixed (raw values).
    fn term_sum(&mut self, t: &Term, fixed: &HashMap<(bool, String), u8>) -> Result<Complex64> {
        let mut dummies: Vec<(bool, String)> = t.dummy_labels().into_iter().collect();
        dummies.retain(|d| !fixed.contains_key(d));
        // each slot reads either a fixed value or bit k of the mask
        enum Src {
            Fixed(u8),
            Bit(usize),
        }
        let plan: Vec<Vec<(Src, bool)>> = t
            .factors
            .iter()
            .map(|f| {
                f.slots()
                    .map(|i| {
                        let key = (i.primed, i.label.clone());
                        let src = match dummies.iter().position(|d| *d == key) {
                            Some(k) => Src::Bit(k),
                            None => Src::Fixed(fixed[&key]),
                        };
                        (src, i.up)
                    })
                    .collect()
            })
            .collect();
        let mut memo: Vec<HashMap<Vec<u8>, Complex64>> = vec![HashMap::new(); t.factors.len()];
        let coeff = t.coeff.to_c64();
        let mut total = Complex64::new(0.0, 0.0);
        let mut lowered = vec![];
        for mask in 0u32..(1u32 << dummies.len()) {
            let mut prod = coeff;
            for (fi, f) in t.factors.iter().enumerate() {
                let mut sign = 1.0;
                lowered.clear();
                for (src, up) in &plan[fi] {
                    let raw = match src {
                        Src::Fixed(v) => *v,
                        Src::Bit(k) => ((mask >> k) & 1) as u8,
                    };
                    let (v, s) = lower(*up, raw);
                    sign *= s;
                    lowered.push(v);
                }
                debug_assert_eq!(lowered.len(), flat_len(f));
                let value = match memo[fi].get(&lowered) {
                    Some(v) => *v,
                    None => {
                        let v = self.factor_lowered(f, &lowered)?;
                        memo[fi].insert(lowered.clone(), v);
                        v
                    }
                };
                prod *= sign * value;
                if prod == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            total += prod;
        }
        Ok(total)
    }
}

/// Evaluate every free-index component of `e`; projectors are expanded
/// first. Free indices are ordered as in `e.free_indices()`.
pub fn jet_eval(e: &Expression, a: &mut JetAssignment) -> Result<JetValues> {
    let e = super::ops::expand_projectors(e);
    e.validate()?;
    let free = e.free_indices();
    let n = free.len();
    let mut values = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (pos, slot) in values.iter_mut().enumerate() {
        let mut fixed = HashMap::new();
        for (k, i) in free.iter().enumerate() {
            fixed.insert((i.primed, i.label.clone()), ((pos >> (n - 1 - k)) & 1) as u8);
        }
        for t in &e.terms {
            *slot += a.term_sum(t, &fixed)?;
        }
    }
    Ok(JetValues { free, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse::parse;
    use crate::ir::registry::sym;

    #[test]
    fn eps_contraction_evaluates_to_two() {
        let v = jet_eval(&parse("eps_{A B} eps^{A B}").unwrap(), &mut JetAssignment::explicit()).unwrap();
        assert_eq!(v.values, vec![Complex64::new(2.0, 0.0)]);
    }

    #[test]
    fn symmetric_field_difference_vanishes() {
        let e = parse("tau_{A A' B'} - tau_{A B' A'}").unwrap();
        let v = jet_eval(&e, &mut JetAssignment::random(7)).unwrap();
        assert!(v.max_abs() < 1e-14);
    }

    #[test]
    fn commutator_holds_on_second_jets() {
        let e = parse(
            "nabla_{A A'} nabla_{B B'} tau_{C} - nabla_{B B'} nabla_{A A'} tau_{C} \
             - eps_{A B} boxP_{A' B'} tau_{C} - eps_{A' B'} boxU_{A B} tau_{C}",
        )
        .unwrap();
        let v = jet_eval(&e, &mut JetAssignment::random(3)).unwrap();
        assert!(v.max_abs() < 1e-13, "{}", v.max_abs());
    }

    #[test]
    fn box_rule_values_respect_the_box_symmetry() {
        use crate::curvature::{boxes::expand_box_factor, RuleTable};
        let table = RuleTable::default();
        let rule: BoxRule = Arc::new(move |f| expand_box_factor(f, &table));
        let e = parse("boxU_{A B} tau_{C} - boxU_{B A} tau_{C}").unwrap();
        let v = jet_eval(&e, &mut JetAssignment::random(1).with_box_rule(rule)).unwrap();
        assert!(v.max_abs() < 1e-14, "{}", v.max_abs());
    }

    #[test]
    fn explicit_mode_reports_missing_and_asymmetric_jets() {
        let mut a = JetAssignment::explicit();
        let err = jet_eval(&parse("tau_{A}").unwrap(), &mut a).unwrap_err();
        assert!(matches!(err, Error::MissingJet(_)));
        let bad = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(4.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let err = a.set(sym("tau", 1, 2), &[], bad).unwrap_err();
        assert!(matches!(err, Error::SymmetryViolation(_)));
    }
}
