//! Text grammar for expressions.
//!
//! ```text
//! expr    := [sign] term (sign term)*
//! term    := factor ('*'? factor)*
//! factor  := number | 'i' | 'sqrt2' | '(' expr ')'
//!          | deriv factor              -- Leibniz over the operand
//!          | name groups               -- field, eps or named definition
//!          | name '(' arg (',' arg)* ')'  -- script function
//! deriv   := ('nabla' | 'dS' | 'boxU' | 'boxP') groups | 'dt'
//! groups  := ( '_' idx | '^' idx | '_{' list '}' | '^{' list '}' | '{}' )*
//! list    := ( label ['\''] | '(' | ')' | '[' | ']' | '|' )*
//! ```
//!
//! Round brackets inside index lists symmetrize, square brackets
//! antisymmetrize; a group may span several factors of one term and labels
//! between bars are excluded, as are labels whose chirality or level differs
//! from the first label after the bracket (`dS_{(A}^{D} t_{B C) D}`
//! symmetrizes A B C only). Primed and unprimed labels may be interleaved
//! freely, only the order within one chirality matters.

use super::coeff::Coeff;
use super::expr::{Deriv, DerivOp, Expression, Factor, Projector, Term};
use super::index::Index;
use super::ops::differentiate;
use super::registry::registry;
use crate::error::{Error, Result};

/// Argument of a script function call.
#[derive(Clone, Debug)]
pub enum Arg {
    Expr(Expression),
    Name(String),
}

/// Name resolution hooks for definitions and function calls. The plain
/// parser uses an empty scope.
pub trait Scope {
    fn definition(&self, _name: &str, _indices: &[Index]) -> Option<Result<Expression>> {
        None
    }
    fn is_function(&self, _name: &str) -> bool {
        false
    }
    fn is_name_arg(&self, _name: &str) -> bool {
        false
    }
    fn call(&self, name: &str, _args: Vec<Arg>) -> Result<Expression> {
        Err(Error::UnknownSymbol(name.to_string()))
    }
}

pub struct NoScope;
impl Scope for NoScope {}

pub fn parse(text: &str) -> Result<Expression> {
    parse_in(text, &NoScope)
}

pub fn parse_in(text: &str, scope: &dyn Scope) -> Result<Expression> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, scope };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    e.validate()?;
    Ok(e)
}

#[derive(Default)]
struct ProjState {
    open: Option<(bool, Vec<(bool, String)>)>,
    excluded: bool,
    level: Option<(bool, bool)>,
    done: Vec<Projector>,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    scope: &'a dyn Scope,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric()) {
            if self.pos == start && self.s[self.pos].is_ascii_digit() {
                break;
            }
            self.pos += 1;
        }
        if self.pos > start {
            Some(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
        } else {
            None
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut out = Expression::zero();
        let mut sign = Coeff::one();
        if self.eat(b'-') {
            sign = -sign;
        } else {
            self.eat(b'+');
        }
        loop {
            let t = self.term()?;
            out = out.add(&t.scale(sign));
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = Coeff::one();
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -Coeff::one();
                }
                _ => break,
            }
        }
        Ok(out)
    }

    fn starts_factor(&mut self) -> bool {
        match self.peek() {
            Some(c) => c == b'(' || c.is_ascii_alphanumeric(),
            None => false,
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut proj = ProjState::default();
        let mut acc = Expression::scalar(Coeff::one());
        let mut any = false;
        loop {
            if any && self.eat(b'*') {
                // explicit product sign
            } else if !self.starts_factor() {
                break;
            }
            let f = self.factor(&mut proj)?;
            acc = acc.mul(&f);
            any = true;
        }
        if !any {
            return Err(self.err("expected a factor"));
        }
        if proj.open.is_some() {
            return Err(self.err("unclosed symmetrization"));
        }
        if !proj.done.is_empty() {
            for t in &mut acc.terms {
                t.projectors.extend(proj.done.iter().cloned());
            }
        }
        Ok(acc)
    }

    fn number(&mut self) -> Result<Coeff> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let n: i128 = std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("bad number"))?;
        if self.pos < self.s.len() && self.s[self.pos] == b'/' {
            self.pos += 1;
            let s2 = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let d: i128 = std::str::from_utf8(&self.s[s2..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("bad denominator"))?;
            if d == 0 {
                return Err(self.err("zero denominator"));
            }
            return Ok(Coeff::frac(n, d));
        }
        Ok(Coeff::int(n))
    }

    fn factor(&mut self, proj: &mut ProjState) -> Result<Expression> {
        let c = self.peek().ok_or_else(|| self.err("unexpected end"))?;
        if c.is_ascii_digit() {
            return Ok(Expression::scalar(self.number()?));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(e);
        }
        let start = self.pos;
        let name = self.ident().ok_or_else(|| self.err("expected identifier"))?;
        match name.as_str() {
            "i" => return Ok(Expression::scalar(Coeff::i())),
            "sqrt2" => return Ok(Expression::scalar(Coeff::sqrt2())),
            _ => {}
        }
        if let Some(op) = DerivOp::from_token(&name) {
            let idx = self.groups(proj)?;
            let (unp, pri) = split_chirality(idx);
            let (nu, np) = op.shape();
            if unp.len() != nu || pri.len() != np {
                self.pos = start;
                return Err(self.err(&format!("`{name}` needs {nu} unprimed and {np} primed indices")));
            }
            if !self.starts_factor() {
                return Err(self.err("derivative without operand"));
            }
            let operand = self.factor(proj)?;
            return Ok(differentiate(&operand, &Deriv::new(op, unp, pri)));
        }
        if self.scope.is_function(&name) && self.peek() == Some(b'(') {
            self.pos += 1;
            let mut args = vec![];
            loop {
                let save = self.pos;
                if let Some(mut id) = self.ident() {
                    if self.s.get(self.pos) == Some(&b'\'') {
                        self.pos += 1;
                        id.push('\'');
                    }
                    let after = self.peek();
                    if self.scope.is_name_arg(&id) && matches!(after, Some(b',') | Some(b')')) {
                        args.push(Arg::Name(id));
                    } else {
                        self.pos = save;
                        args.push(Arg::Expr(self.expr()?));
                    }
                } else {
                    args.push(Arg::Expr(self.expr()?));
                }
                if self.eat(b',') {
                    continue;
                }
                if self.eat(b')') {
                    break;
                }
                return Err(self.err("expected `,` or `)` in call"));
            }
            return self.scope.call(&name, args);
        }
        let idx = self.groups(proj)?;
        if name == "eps" {
            if idx.len() != 2 || idx[0].primed != idx[1].primed {
                self.pos = start;
                return Err(self.err("eps takes two indices of equal chirality"));
            }
            return Ok(Expression::from_factor(Factor::eps(idx[0].clone(), idx[1].clone())));
        }
        if let Some(def) = self.scope.definition(&name, &idx) {
            return def;
        }
        let (unp, pri) = split_chirality(idx);
        match registry().lookup(&name, unp.len(), pri.len()) {
            Some(id) => Ok(Expression::from_factor(Factor::field(id, unp, pri))),
            None => {
                self.pos = start;
                if registry().has_name(&name) {
                    Err(Error::IllFormed(format!(
                        "`{name}` has no form with {} unprimed and {} primed indices",
                        unp.len(),
                        pri.len()
                    )))
                } else {
                    Err(Error::UnknownSymbol(name))
                }
            }
        }
    }

    fn groups(&mut self, proj: &mut ProjState) -> Result<Vec<Index>> {
        let mut out = vec![];
        loop {
            // no whitespace allowed between a name and its index groups
            let Some(&c) = self.s.get(self.pos) else { break };
            match c {
                b'_' | b'^' => {
                    self.pos += 1;
                    let up = c == b'^';
                    if self.s.get(self.pos) == Some(&b'{') {
                        self.pos += 1;
                        self.index_list(up, proj, &mut out)?;
                    } else {
                        let l = self.ident().ok_or_else(|| self.err("expected index label"))?;
                        let primed = self.s.get(self.pos) == Some(&b'\'');
                        if primed {
                            self.pos += 1;
                        }
                        let i = Index::new(l, primed, up);
                        record(proj, &i);
                        out.push(i);
                    }
                }
                b'{' if self.s.get(self.pos + 1) == Some(&b'}') => {
                    self.pos += 2;
                }
                _ => break,
            }
        }
        Ok(out)
    }

    fn index_list(&mut self, up: bool, proj: &mut ProjState, out: &mut Vec<Index>) -> Result<()> {
        loop {
            let c = self.peek().ok_or_else(|| self.err("unclosed index list"))?;
            match c {
                b'}' => {
                    self.pos += 1;
                    return Ok(());
                }
                b'(' | b'[' => {
                    self.pos += 1;
                    if proj.open.is_some() {
                        return Err(self.err("nested symmetrization"));
                    }
                    proj.open = Some((c == b'[', vec![]));
                    proj.level = None;
                }
                b')' | b']' => {
                    self.pos += 1;
                    let (anti, labels) =
                        proj.open.take().ok_or_else(|| self.err("unbalanced bracket"))?;
                    if anti != (c == b']') {
                        return Err(self.err("mismatched bracket"));
                    }
                    if labels.len() < 2 {
                        return Err(self.err("symmetrization over fewer than two indices"));
                    }
                    if labels.iter().any(|l| l.0 != labels[0].0) {
                        return Err(self.err("symmetrization mixes chiralities"));
                    }
                    proj.done.push(Projector { labels, anti });
                }
                b'|' => {
                    self.pos += 1;
                    proj.excluded = !proj.excluded;
                }
                _ => {
                    let l = self.ident().ok_or_else(|| self.err("expected index label"))?;
                    let primed = self.s.get(self.pos) == Some(&b'\'');
                    if primed {
                        self.pos += 1;
                    }
                    let i = Index::new(l, primed, up);
                    record(proj, &i);
                    out.push(i);
                }
            }
        }
    }
}

fn record(proj: &mut ProjState, i: &Index) {
    if proj.excluded {
        return;
    }
    if let Some((_, labels)) = &mut proj.open {
        // only labels of the chirality and level of the first one take part
        if proj.level.is_none() {
            proj.level = Some((i.primed, i.up));
        }
        if proj.level == Some((i.primed, i.up)) {
            labels.push((i.primed, i.label.clone()));
        }
    }
}

fn split_chirality(idx: Vec<Index>) -> (Vec<Index>, Vec<Index>) {
    idx.into_iter().partition(|i| !i.primed)
}

/// Build a single-term expression; used by tests and scripts.
pub fn term_of(c: Coeff, factors: Vec<Factor>) -> Expression {
    Expression::from_term(Term::new(c, factors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_pair_parses_to_one_term() {
        let e = parse("eps_{A B} eps^{A B}").unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].factors.len(), 2);
        assert!(e.terms[0].factors.iter().all(|f| f.is_eps()));
    }

    #[test]
    fn symmetrized_derivative_factor() {
        let e = parse("nabla_{B' (A} tau_{B) A'}{}^{B'}").unwrap();
        assert_eq!(e.terms.len(), 1);
        let t = &e.terms[0];
        assert_eq!(t.factors.len(), 1);
        assert_eq!(t.factors[0].derivs.len(), 1);
        assert_eq!(t.projectors.len(), 1);
        assert_eq!(t.projectors[0].labels.len(), 2);
    }

    #[test]
    fn signature_mismatch_rejected() {
        let r = parse("tau_{A A' B'} + sigma_A");
        assert!(matches!(r, Err(Error::SignatureMismatch(_))), "{r:?}");
    }

    #[test]
    fn errors_carry_position() {
        match parse("tau_A + + sigma_A") {
            Err(Error::Syntax { pos, .. }) => assert!(pos >= 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("zeta_A"), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn excluded_labels_are_not_symmetrized() {
        let e = parse("phi_{(A|A'|B)}").unwrap();
        assert_eq!(e.terms[0].projectors[0].labels.len(), 2);
    }
}
