//! Exact linear algebra over component forms.

use std::collections::BTreeSet;

use super::coeff::Coeff;
use super::components::{term_components, ComponentForm};
use super::expr::Expression;
use super::index::Index;

fn form(e: &Expression, free: &[Index]) -> ComponentForm {
    let mut out = ComponentForm::new();
    for t in &super::ops::expand_projectors(e).terms {
        for (k, c) in term_components(t, free) {
            *out.entry(k).or_insert_with(Coeff::zero) += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Coefficients `λ` with `target = Σ λ_i candidates[i]`, if any. Free
/// labels of all inputs must agree. Among several solutions the one with
/// free variables set to zero is returned.
pub fn solve_combination(target: &Expression, candidates: &[Expression]) -> Option<Vec<Coeff>> {
    let free = target
        .free_indices()
        .into_iter()
        .chain(candidates.iter().flat_map(|c| c.free_indices()))
        .collect::<BTreeSet<Index>>()
        .into_iter()
        .collect::<Vec<_>>();
    let cols: Vec<ComponentForm> = candidates.iter().map(|c| form(c, &free)).collect();
    let rhs = form(target, &free);
    let keys: Vec<_> = cols
        .iter()
        .flat_map(|c| c.keys().cloned())
        .chain(rhs.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = candidates.len();
    // augmented rows
    let mut rows: Vec<Vec<Coeff>> = keys
        .iter()
        .map(|k| {
            let mut r: Vec<Coeff> = cols.iter().map(|c| c.get(k).copied().unwrap_or_else(Coeff::zero)).collect();
            r.push(rhs.get(k).copied().unwrap_or_else(Coeff::zero));
            r
        })
        .collect();
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for x in rows[r].iter_mut() {
            *x = *x * inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                for j in 0..=n {
                    let v = rows[r][j];
                    rows[i][j] = rows[i][j] - f * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut sol = vec![Coeff::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rows[i][n];
    }
    Some(sol)
}

/// `λ` with `x = λ y`, when `y` is nonzero and the two are proportional.
pub fn ratio(x: &Expression, y: &Expression) -> Option<Coeff> {
    let s = solve_combination(x, std::slice::from_ref(y))?;
    if super::canon::canonicalize(y).is_zero() {
        return None;
    }
    Some(s[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse;

    #[test]
    fn finds_combination() {
        let t = parse("3 tau_{A} + i eps_{A B} tau^{B}").unwrap();
        let s = solve_combination(&t, &[parse("tau_{A}").unwrap()]).unwrap();
        assert_eq!(s, vec![Coeff::int(3) - Coeff::i()]);
        assert!(solve_combination(&t, &[parse("sigma_{A}").unwrap()]).is_none());
    }

    #[test]
    fn ratio_of_eps_forms() {
        let r = ratio(&parse("eps_{A B} eps^{C D} eps_{C D}").unwrap(), &parse("eps_{A B}").unwrap());
        assert_eq!(r, Some(Coeff::int(2)));
    }
}
