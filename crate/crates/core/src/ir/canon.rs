//! Canonical form of expressions.
//!
//! Per term: projectors expanded, ε contractions applied, then the term is
//! brought to the lexicographically least printed form over all
//! arrangements allowed by the declared symmetries (symmetric slot groups,
//! ε antisymmetry, commuting flat derivatives, order of like factors), with
//! dummies renamed in traversal order and see-sawed so the first occurrence
//! is up. Like terms are merged, and finally terms whose component forms are
//! linearly dependent on earlier ones (Schouten-type identities, commutator
//! identities) are rewritten in terms of those.

use std::collections::{BTreeMap, BTreeSet};

use super::coeff::Coeff;
use super::components::{term_components, ComponentForm};
use super::expr::{Base, Deriv, Expression, Factor, Term};
use super::index::Index;
use super::ops::{expand_projectors, signed_permutations};
use super::print::fmt_factors;
use super::registry::registry;
use crate::error::{Error, Result};

const DUMMY_NAMES: [&str; 13] = ["K", "L", "M", "N", "P", "Q", "R", "S", "U", "V", "W", "Y", "Z"];
const MAX_ARRANGEMENTS: usize = 200_000;

/// Remove every ε that has a contracted slot, returning the scalar weight
/// picked up, or `None` when the term vanishes.
fn eliminate_eps(t: &mut Term) -> Option<Coeff> {
    let mut weight = Coeff::one();
    'outer: loop {
        let counts = t.label_counts();
        for fi in 0..t.factors.len() {
            if !t.factors[fi].is_eps() {
                continue;
            }
            if !t.factors[fi].derivs.is_empty() {
                return None;
            }
            let slots: Vec<Index> = t.factors[fi].slots().cloned().collect();
            // trace ε_A^A = 2, ε^A_A = -2
            if slots[0].label == slots[1].label {
                weight = weight * Coeff::int(if slots[0].up { -2 } else { 2 });
                t.factors.remove(fi);
                continue 'outer;
            }
            for k in 0..2 {
                let s = &slots[k];
                if counts[&(s.primed, s.label.clone())].len() != 2 {
                    continue;
                }
                let other = &slots[1 - k];
                let mut sign = 1i128;
                // see-saw so the ε slot is up and its partner down
                if !s.up {
                    sign = -sign;
                }
                // ε_X^L ξ_L = ξ_X, ε^{XL} ξ_L = ξ^X ; slot 1 contracted costs a sign
                if k == 0 {
                    sign = -sign;
                }
                t.factors.remove(fi);
                for f in &mut t.factors {
                    for i in f.slots_mut() {
                        if i.primed == s.primed && i.label == s.label {
                            i.label = other.label.clone();
                            i.up = other.up;
                        }
                    }
                }
                weight = weight * Coeff::int(sign);
                continue 'outer;
            }
        }
        return Some(weight);
    }
}

/// Alternatives for one factor: rearranged copy and the sign it costs.
fn factor_arrangements(f: &Factor) -> Vec<(Factor, i128)> {
    let mut alts: Vec<(Factor, i128)> = vec![(f.clone(), 1)];
    let permute_slots = |alts: Vec<(Factor, i128)>,
                         get: &dyn Fn(&mut Factor) -> &mut Vec<Index>,
                         group: &[usize],
                         anti: bool| {
        let mut out = vec![];
        for (base, s) in alts {
            for (perm, ps) in signed_permutations(group.len()) {
                let mut nf = base.clone();
                let orig: Vec<Index> = group.iter().map(|&k| get(&mut nf.clone())[k].clone()).collect();
                {
                    let v = get(&mut nf);
                    for (pos, &src) in perm.iter().enumerate() {
                        v[group[pos]] = orig[src].clone();
                    }
                }
                out.push((nf, if anti { s * ps } else { s }));
            }
        }
        out
    };
    match f.base {
        Base::Eps => {
            if f.unp.len() == 2 {
                alts = permute_slots(alts, &|g: &mut Factor| &mut g.unp, &[0, 1], true);
            } else {
                alts = permute_slots(alts, &|g: &mut Factor| &mut g.pri, &[0, 1], true);
            }
        }
        Base::Sym(id) => {
            let s = registry().get(id);
            for g in &s.sym_unprimed {
                alts = permute_slots(alts, &|g: &mut Factor| &mut g.unp, g, false);
            }
            for g in &s.sym_primed {
                alts = permute_slots(alts, &|g: &mut Factor| &mut g.pri, g, false);
            }
        }
    }
    // symmetric operator slots
    for di in 0..f.derivs.len() {
        if !f.derivs[di].op.is_symmetric() {
            continue;
        }
        let primed = f.derivs[di].op == super::expr::DerivOp::BoxP;
        let mut out = vec![];
        for (base, s) in alts {
            out.push((base.clone(), s));
            let mut sw = base;
            let v: &mut Vec<Index> = if primed { &mut sw.derivs[di].pri } else { &mut sw.derivs[di].unp };
            v.swap(0, 1);
            out.push((sw, s));
        }
        alts = out;
    }
    // runs of commuting flat operators
    let mut k = 0;
    while k < f.derivs.len() {
        if !f.derivs[k].op.is_flat() {
            k += 1;
            continue;
        }
        let mut j = k;
        while j < f.derivs.len() && f.derivs[j].op.is_flat() {
            j += 1;
        }
        if j - k > 1 {
            let mut out = vec![];
            for (base, s) in alts {
                let run: Vec<Deriv> = base.derivs[k..j].to_vec();
                for (perm, _) in signed_permutations(run.len()) {
                    let mut nf = base.clone();
                    for (pos, &src) in perm.iter().enumerate() {
                        nf.derivs[k + pos] = run[src].clone();
                    }
                    out.push((nf, s));
                }
            }
            alts = out;
        }
        k = j;
    }
    alts
}

fn dummy_name(k: usize, free: &BTreeSet<String>, taken: &mut usize) -> String {
    loop {
        let n = *taken;
        *taken += 1;
        let name = if n < DUMMY_NAMES.len() {
            DUMMY_NAMES[n].to_string()
        } else {
            format!("{}{}", DUMMY_NAMES[n % DUMMY_NAMES.len()], n / DUMMY_NAMES.len())
        };
        if !free.contains(&name) {
            let _ = k;
            return name;
        }
    }
}

/// Rename dummies in traversal order and see-saw them so the first
/// occurrence is up. Returns the sign picked up.
fn normalize_dummies(t: &mut Term, free_u: &BTreeSet<String>, free_p: &BTreeSet<String>) -> i128 {
    let mut sign = 1;
    let mut map: BTreeMap<(bool, String), (String, bool)> = BTreeMap::new();
    let dummies = t.dummy_labels();
    let mut nu = 0usize;
    let mut np = 0usize;
    for f in &t.factors {
        for i in f.slots() {
            let key = (i.primed, i.label.clone());
            if !dummies.contains(&key) || map.contains_key(&key) {
                continue;
            }
            let name = if i.primed {
                dummy_name(np, free_p, &mut np)
            } else {
                dummy_name(nu, free_u, &mut nu)
            };
            // the first occurrence must end up raised
            let flip = !i.up;
            if flip {
                sign = -sign;
            }
            map.insert(key, (name, flip));
        }
    }
    for f in &mut t.factors {
        for i in f.slots_mut() {
            if let Some((n, flip)) = map.get(&(i.primed, i.label.clone())) {
                i.label = n.clone();
                if *flip {
                    i.up = !i.up;
                }
            }
        }
    }
    sign
}

fn shape_key(f: &Factor, free: &BTreeSet<(bool, String)>) -> String {
    let mut frees: Vec<String> = f
        .slots()
        .filter(|i| free.contains(&(i.primed, i.label.clone())))
        .map(|i| format!("{}{}{}", i.label, if i.primed { "'" } else { "" }, if i.up { "^" } else { "_" }))
        .collect();
    frees.sort();
    let ops: Vec<&str> = f.derivs.iter().map(|d| d.op.token()).collect();
    format!(
        "{}:{}:{}:{:02}:{}:{}",
        f.name(),
        f.unp.len(),
        f.pri.len(),
        f.derivs.len(),
        ops.join(","),
        frees.join(",")
    )
}

fn for_each_product<T: Clone>(choices: &[Vec<T>], mut visit: impl FnMut(&[T])) {
    let mut idx = vec![0usize; choices.len()];
    if choices.iter().any(|c| c.is_empty()) {
        return;
    }
    let mut cur: Vec<T> = choices.iter().map(|c| c[0].clone()).collect();
    loop {
        visit(&cur);
        let mut k = choices.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                cur[k] = choices[k][idx[k]].clone();
                break;
            }
            idx[k] = 0;
            cur[k] = choices[k][0].clone();
        }
    }
}

/// Canonical arrangement of a single term: (key, sign, term with unit
/// coefficient). `None` when the term vanishes by symmetry.
fn canonical_term(t: &Term) -> Option<(String, Coeff, Term)> {
    if t.coeff.is_zero() {
        return None;
    }
    let mut t = Term { projectors: vec![], ..t.clone() };
    if t.factors.iter().any(|f| f.is_constant() && !f.derivs.is_empty() && !f.is_eps()) {
        return None;
    }
    let w = eliminate_eps(&mut t)?;
    let coeff = t.coeff * w;
    let free_idx = t.free_indices();
    let free: BTreeSet<(bool, String)> = free_idx.iter().map(|i| (i.primed, i.label.clone())).collect();
    let free_u: BTreeSet<String> = free_idx.iter().filter(|i| !i.primed).map(|i| i.label.clone()).collect();
    let free_p: BTreeSet<String> = free_idx.iter().filter(|i| i.primed).map(|i| i.label.clone()).collect();

    let mut factors = t.factors.clone();
    factors.sort_by_cached_key(|f| shape_key(f, &free));
    // tie groups of equal shape
    let keys: Vec<String> = factors.iter().map(|f| shape_key(f, &free)).collect();
    let mut groups: Vec<(usize, usize)> = vec![];
    let mut k = 0;
    while k < factors.len() {
        let mut j = k + 1;
        while j < factors.len() && keys[j] == keys[k] {
            j += 1;
        }
        if j - k > 1 {
            groups.push((k, j));
        }
        k = j;
    }
    let mut order_choices: Vec<Vec<Vec<usize>>> = vec![];
    for &(a, b) in &groups {
        order_choices.push(
            signed_permutations(b - a).into_iter().map(|(p, _)| p.into_iter().map(|x| x + a).collect()).collect(),
        );
    }
    let arrangements: Vec<Vec<(Factor, i128)>> = factors.iter().map(factor_arrangements).collect();
    let total: usize = arrangements.iter().map(Vec::len).product::<usize>()
        * order_choices.iter().map(Vec::len).product::<usize>();
    let arrangements = if total > MAX_ARRANGEMENTS {
        log::warn!("canonicalize: {total} arrangements, falling back to identity arrangement");
        factors.iter().map(|f| vec![(f.clone(), 1)]).collect()
    } else {
        arrangements
    };

    let mut best: Option<(String, BTreeSet<i128>, Term)> = None;
    let base_order: Vec<usize> = (0..factors.len()).collect();
    let order_list: Vec<Vec<usize>> = {
        let mut list = vec![];
        for_each_product(&order_choices, |choice| {
            let mut ord = base_order.clone();
            for (g, perm) in groups.iter().zip(choice) {
                for (pos, &src) in perm.iter().enumerate() {
                    ord[g.0 + pos] = src;
                }
            }
            list.push(ord);
        });
        if list.is_empty() {
            list.push(base_order.clone());
        }
        list
    };
    for ord in &order_list {
        let choices: Vec<Vec<(Factor, i128)>> = ord.iter().map(|&i| arrangements[i].clone()).collect();
        for_each_product(&choices, |pick| {
            let mut cand = Term::new(Coeff::one(), pick.iter().map(|p| p.0.clone()).collect());
            let mut sign: i128 = pick.iter().map(|p| p.1).product();
            sign *= normalize_dummies(&mut cand, &free_u, &free_p);
            let key = fmt_factors(&cand);
            match &mut best {
                Some((bk, signs, _)) if *bk == key => {
                    signs.insert(sign);
                }
                Some((bk, _, _)) if *bk < key => {}
                _ => {
                    let mut s = BTreeSet::new();
                    s.insert(sign);
                    best = Some((key, s, cand));
                }
            }
        });
    }
    let (key, signs, term) = best?;
    if signs.len() > 1 {
        return None;
    }
    let sign = *signs.iter().next().unwrap();
    Some((key, coeff * Coeff::int(sign), term))
}

/// Rewrite linearly dependent terms (by exact component form) in terms of
/// earlier ones.
fn reduce_dependencies(terms: Vec<Term>) -> Vec<Term> {
    if terms.len() <= 1 {
        return terms.into_iter().filter(|t| !is_component_zero(t)).collect();
    }
    let free = terms[0].free_indices();
    struct Row {
        pivot: (Vec<u8>, super::components::Monomial),
        vec: ComponentForm,
        comb: BTreeMap<usize, Coeff>,
    }
    let mut rows: Vec<Row> = vec![];
    // rewrite[j] = Some(map i -> λ) for dependent terms
    let mut rewrite: Vec<Option<BTreeMap<usize, Coeff>>> = vec![None; terms.len()];
    for (j, t) in terms.iter().enumerate() {
        let unit = Term { coeff: Coeff::one(), ..t.clone() };
        let mut v = term_components(&unit, &free);
        let mut comb: BTreeMap<usize, Coeff> = BTreeMap::new();
        comb.insert(j, Coeff::one());
        for r in &rows {
            let Some(&x) = v.get(&r.pivot) else { continue };
            let f = x * r.vec[&r.pivot].inv().expect("nonzero pivot");
            for (k, c) in &r.vec {
                let e = v.entry(k.clone()).or_insert_with(Coeff::zero);
                *e = *e - f * *c;
            }
            v.retain(|_, c| !c.is_zero());
            for (i, c) in &r.comb {
                let e = comb.entry(*i).or_insert_with(Coeff::zero);
                *e = *e - f * *c;
            }
        }
        if v.is_empty() {
            let mut lam = BTreeMap::new();
            for (i, c) in comb {
                if i != j && !c.is_zero() {
                    lam.insert(i, -c);
                }
            }
            rewrite[j] = Some(lam);
        } else {
            let pivot = v.keys().next().unwrap().clone();
            rows.push(Row { pivot, vec: v, comb });
        }
    }
    let mut coeffs: Vec<Coeff> = terms.iter().map(|t| t.coeff).collect();
    for j in 0..terms.len() {
        if let Some(lam) = &rewrite[j] {
            let cj = coeffs[j];
            coeffs[j] = Coeff::zero();
            for (i, l) in lam {
                coeffs[*i] += cj * *l;
            }
        }
    }
    terms
        .into_iter()
        .zip(coeffs)
        .filter(|(_, c)| !c.is_zero())
        .map(|(t, c)| Term { coeff: c, ..t })
        .collect()
}

fn is_component_zero(t: &Term) -> bool {
    term_components(t, &t.free_indices()).is_empty()
}

/// Canonical form; a fixed point of itself.
pub fn canonicalize(e: &Expression) -> Expression {
    let e = expand_projectors(e);
    let mut merged: BTreeMap<String, (Coeff, Term)> = BTreeMap::new();
    for t in &e.terms {
        if let Some((key, c, term)) = canonical_term(t) {
            let entry = merged.entry(key).or_insert_with(|| (Coeff::zero(), term));
            entry.0 += c;
        }
    }
    let terms: Vec<Term> = merged
        .into_values()
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, t)| Term { coeff: c, ..t })
        .collect();
    Expression { terms: reduce_dependencies(terms) }
}

/// `a == b` as spinor expressions.
pub fn equal(a: &Expression, b: &Expression) -> Result<bool> {
    if let (Some(sa), Some(sb)) = (a.signature(), b.signature()) {
        if sa != sb {
            return Err(Error::SignatureMismatch(format!(
                "{} vs {}",
                super::expr::fmt_sig(&sa),
                super::expr::fmt_sig(&sb)
            )));
        }
    }
    Ok(canonicalize(&a.sub(b)).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse::parse;

    fn canon(s: &str) -> Expression {
        canonicalize(&parse(s).unwrap())
    }

    #[test]
    fn eps_squared_is_two() {
        assert_eq!(canon("eps_{A B} eps^{A B}").to_string(), "2");
        assert_eq!(canon("eps_{A B} eps^{B A}").to_string(), "-2");
    }

    #[test]
    fn seesaw_lowering() {
        // ξ_B = ξ^A ε_{AB}, ε_{AB} ξ^B = -ξ_A
        assert!(equal(&parse("eps_{A B} tau^{A}").unwrap(), &parse("tau_{B}").unwrap()).unwrap());
        assert!(equal(&parse("eps_{A B} tau^{B}").unwrap(), &parse("-tau_{A}").unwrap()).unwrap());
        assert!(equal(&parse("eps^{A B} tau_{B}").unwrap(), &parse("tau^{A}").unwrap()).unwrap());
    }

    #[test]
    fn antisymmetrized_symmetric_field_vanishes() {
        assert!(canon("tau_{A [A' B']}").is_zero());
    }

    #[test]
    fn eps_antisymmetry() {
        assert!(equal(&parse("eps_{A B} tau^{B}").unwrap(), &parse("-eps_{B A} tau^{B}").unwrap()).unwrap());
        assert!(!equal(&parse("tau_A").unwrap(), &parse("2 tau_A").unwrap()).unwrap());
    }

    #[test]
    fn dummy_names_do_not_matter() {
        let a = canon("sigma_{A' B C} tau^{B C' D'} eps_{C' D'}");
        let b = canon("sigma_{A' Q R} tau^{Q X' Y'} eps_{X' Y'}");
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn idempotent() {
        let e = canon("nabla_{B' (A} tau_{B) A'}{}^{B'} - nabla_{A' (A} tau_{B)} - m sigma_{A' A B}");
        assert_eq!(canonicalize(&e), e);
    }
}
