//! Deterministic printer. Output always reparses to an equal expression.

use std::fmt::Write;

use super::coeff::Coeff;
use super::expr::{Deriv, Expression, Factor, Term};
use super::index::Index;
use super::ops::expand_projectors;

pub fn fmt_slots(out: &mut String, unp: &[Index], pri: &[Index]) {
    let all: Vec<&Index> = unp.iter().chain(pri.iter()).collect();
    let mut k = 0;
    while k < all.len() {
        let up = all[k].up;
        let mut j = k;
        let mut labels = vec![];
        while j < all.len() && all[j].up == up {
            labels.push(all[j].to_string());
            j += 1;
        }
        let _ = write!(out, "{}{{{}}}", if up { "^" } else { "_" }, labels.join(" "));
        k = j;
    }
}

pub fn fmt_deriv(out: &mut String, d: &Deriv) {
    out.push_str(d.op.token());
    fmt_slots(out, &d.unp, &d.pri);
}

pub fn fmt_factor(f: &Factor) -> String {
    let mut out = String::new();
    for d in &f.derivs {
        fmt_deriv(&mut out, d);
        out.push(' ');
    }
    out.push_str(f.name());
    fmt_slots(&mut out, &f.unp, &f.pri);
    out
}

pub fn fmt_factors(t: &Term) -> String {
    t.factors.iter().map(fmt_factor).collect::<Vec<_>>().join(" ")
}

fn fmt_term_body(c: &Coeff, t: &Term) -> String {
    let body = fmt_factors(t);
    if body.is_empty() {
        return c.to_string();
    }
    if c.is_one() {
        body
    } else {
        format!("{c} {body}")
    }
}

impl std::fmt::Display for Expression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let e = if self.terms.iter().any(|t| !t.projectors.is_empty()) {
            expand_projectors(self)
        } else {
            self.clone()
        };
        if e.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in e.terms.iter().enumerate() {
            let (neg, c) = if t.coeff.leads_negative() { (true, -t.coeff) } else { (false, t.coeff) };
            let body = fmt_term_body(&c, t);
            match (k, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::ir::parse::parse;

    #[test]
    fn prints_mixed_variance_groups() {
        let e = parse("tau_{A}^{B'}_{C'}").unwrap();
        assert_eq!(e.to_string(), "tau_{A}^{B'}_{C'}");
    }

    #[test]
    fn prints_derivatives_and_signs() {
        let e = parse("- 3/2 nabla_{A A'} tau_{B} + i m eps_{A B} sigma_{A'}").unwrap();
        assert_eq!(e.to_string(), "-3/2 nabla_{A A'} tau_{B} + i m eps_{A B} sigma_{A'}");
    }
}
