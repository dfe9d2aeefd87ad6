//! Interpreter for derivation scripts.
//!
//! ```text
//! # comment
//! def NAME[_{idx}^{idx}] = expr        named expression, instantiable at indices
//! rule NAME: field_{idx} -> expr      substitution used by subst(...)
//! step "text" NAME[_{idx}] = expr     like def, and recorded in the trace
//! expect_zero NAME                    canonical form must vanish
//! expect_nonzero NAME                 canonical form must not vanish
//! expect_absent NAME SYMBOL           no factor named SYMBOL may survive
//! meta KEY = VALUE                    copied to the report
//! ```
//!
//! Indented lines continue the previous statement. Expressions use the
//! ordinary grammar plus these functions:
//!
//! | call                          | meaning                                         |
//! |-------------------------------|-------------------------------------------------|
//! | `canon(X)`                    | canonical form                                  |
//! | `commute(X, L1, L2, ..)`      | move ∇s carrying the listed labels innermost    |
//! | `expand(X)`                   | replace □ by the rule-table action              |
//! | `flat(X)`                     | `expand`, then Ψ = Φ = Λ = F = 0                |
//! | `zero(X, s1, ..)`             | drop terms containing the named symbols         |
//! | `subst(X, R1, ..)`            | apply substitution rules once                   |
//! | `split(X, A', C, ..)`         | space-spinor split, free `A'` renamed to `C`    |
//! | `conj(X)`                     | complex conjugate                               |
//! | `ratio(X, Y)`                 | scalar `λ` with `X = λ Y`                       |
//! | `solve(X, Y1, ..)`            | `X - Σ λ_k Y_k` with exact λ, λ recorded        |
//! | `nullity(X, probe, u1, ..)`   | unknown components left free by `X = 0`         |
//!
//! Rule-table entries are available as `GU_{A A' R}^{S'}`, `GL_{A A' R'}^{S}`,
//! `G5U_{R}^{S}`, `G5L_{R'}^{S'}`, `METRIC_{A B A' B'}`,
//! `VOLUME_{A B C D A' B' C' D'}` and the scalar `CLIFFORD`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::rank::forced_nullity;
use super::report::{Assertion, Report, Status, TraceStep};
use crate::curvature::{
    commute_nablas, conjugate, expand_box, space_split, specialize_zero, Frame, NablaOrder, RuleTable,
    FLAT_BACKGROUND,
};
use crate::error::{Error, Result};
use crate::ir::expr::{Base, Expression, Factor, Term};
use crate::ir::index::Index;
use crate::ir::ops::{differentiate, instantiate_traced};
use crate::ir::parse::{parse_in, Arg, Scope};
use crate::ir::{canonicalize, linear, Coeff};

const FUNCTIONS: [&str; 11] =
    ["canon", "commute", "expand", "flat", "zero", "subst", "split", "conj", "ratio", "solve", "nullity"];

#[derive(Clone)]
struct Named {
    formal: Vec<Index>,
    expr: Expression,
}

#[derive(Clone)]
struct Rule {
    symbol: Base,
    formal: Vec<Index>,
    rhs: Expression,
}

struct Env<'a> {
    table: &'a RuleTable,
    defs: HashMap<String, Named>,
    rules: HashMap<String, Rule>,
    // ratio results are recorded for the report
    notes: RefCell<Vec<String>>,
}

/// Split `NAME_{..}^{..}` into the name and its index list.
fn parse_header(h: &str) -> std::result::Result<(String, Vec<Index>), String> {
    let h = h.trim();
    let end = h.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(h.len());
    let name = h[..end].to_string();
    if name.is_empty() || name.as_bytes()[0].is_ascii_digit() {
        return Err(format!("bad name in `{h}`"));
    }
    let mut idx = vec![];
    let b = h[end..].trim();
    let mut rest = b;
    while !rest.is_empty() {
        let up = match rest.as_bytes()[0] {
            b'^' => true,
            b'_' => false,
            _ => return Err(format!("unexpected `{rest}` in header")),
        };
        rest = rest[1..].trim_start();
        let body;
        if let Some(r) = rest.strip_prefix('{') {
            let close = r.find('}').ok_or("unclosed `{` in header")?;
            body = &r[..close];
            rest = r[close + 1..].trim_start();
        } else {
            let n = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '\'')).unwrap_or(rest.len());
            body = &rest[..n];
            rest = rest[n..].trim_start();
        }
        for tok in body.split_whitespace() {
            let (label, primed) = match tok.strip_suffix('\'') {
                Some(l) => (l, true),
                None => (tok, false),
            };
            idx.push(Index::new(label, primed, up));
        }
    }
    Ok((name, idx))
}

fn table_defs(table: &RuleTable) -> Result<Vec<(&'static str, &'static str, String)>> {
    Ok(vec![
        ("GU", "GU_{A A' R}^{S'}", table.get("gamma.upper")?.to_string()),
        ("GL", "GL_{A A' R'}^{S}", table.get("gamma.lower")?.to_string()),
        ("G5U", "G5U_{R}^{S}", table.get("gamma5.upper")?.to_string()),
        ("G5L", "G5L_{R'}^{S'}", table.get("gamma5.lower")?.to_string()),
        ("METRIC", "METRIC_{A B A' B'}", table.get("metric")?.to_string()),
        ("VOLUME", "VOLUME_{A B C D A' B' C' D'}", table.get("volume")?.to_string()),
        ("CLIFFORD", "CLIFFORD", table.clifford_sign()?.to_string()),
    ])
}

impl<'a> Env<'a> {
    fn new(table: &'a RuleTable) -> Result<Self> {
        let mut env = Env { table, defs: HashMap::new(), rules: HashMap::new(), notes: RefCell::new(vec![]) };
        for (name, header, body) in table_defs(table)? {
            let (_, formal) = parse_header(header).map_err(Error::Table)?;
            let expr = crate::ir::parse(&body).map_err(|e| Error::Table(format!("{name}: {e}")))?;
            env.defs.insert(name.to_string(), Named { formal, expr });
        }
        Ok(env)
    }

    fn parse(&self, text: &str) -> Result<Expression> {
        parse_in(text, self)
    }

    fn expr_arg(&self, a: &Arg) -> Result<Expression> {
        let e = match a {
            Arg::Expr(e) => e.clone(),
            Arg::Name(n) => self.parse(n)?,
        };
        check_well_formed(&e)?;
        Ok(e)
    }

    fn name_arg(a: &Arg) -> Result<String> {
        match a {
            Arg::Name(n) => Ok(n.clone()),
            Arg::Expr(_) => Err(Error::IllFormed("expected a name argument".into())),
        }
    }

    fn subst(&self, e: &Expression, rule: &Rule) -> Expression {
        e.map_terms(|t| {
            if !t.factors.iter().any(|f| f.base == rule.symbol) {
                return Expression::from_term(t.clone());
            }
            let mut acc = Expression::from_term(Term { factors: vec![], ..t.clone() });
            for f in &t.factors {
                if f.base != rule.symbol {
                    acc = acc.mul(&Expression::from_factor(f.clone()));
                    continue;
                }
                let actual: Vec<Index> = f.unp.iter().chain(f.pri.iter()).cloned().collect();
                let mut r = instantiate_traced(&rule.rhs, &rule.formal, &actual, &t.labels());
                for d in f.derivs.iter().rev() {
                    r = differentiate(&r, d);
                }
                let labels = t.labels();
                for rt in &mut r.terms {
                    rt.freshen_dummies(&labels);
                }
                acc = acc.mul(&r);
            }
            acc
        })
    }

    fn call_inner(&self, name: &str, args: Vec<Arg>) -> Result<Expression> {
        let first = || -> Result<Expression> {
            args.first().map(|a| self.expr_arg(a)).ok_or_else(|| Error::IllFormed(format!("{name} needs an argument")))?
        };
        match name {
            "canon" => Ok(canonicalize(&first()?)),
            "commute" => {
                let labels: Vec<String> = args[1..].iter().map(Self::name_arg).collect::<Result<_>>()?;
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                Ok(commute_nablas(&first()?, &NablaOrder::new(&refs)))
            }
            "expand" => expand_box(&first()?, self.table),
            "flat" => Ok(specialize_zero(&expand_box(&first()?, self.table)?, &FLAT_BACKGROUND)),
            "zero" => {
                let names: Vec<String> = args[1..].iter().map(Self::name_arg).collect::<Result<_>>()?;
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                Ok(specialize_zero(&first()?, &refs))
            }
            "subst" => {
                let mut e = first()?;
                for a in &args[1..] {
                    let n = Self::name_arg(a)?;
                    let rule = self.rules.get(&n).ok_or_else(|| Error::UnknownSymbol(format!("rule {n}")))?;
                    e = self.subst(&e, rule);
                }
                Ok(e)
            }
            "split" => {
                let names: Vec<String> = args[1..].iter().map(Self::name_arg).collect::<Result<_>>()?;
                if names.len() % 2 != 0 {
                    return Err(Error::IllFormed("split takes label pairs".into()));
                }
                let pairs: Vec<(&str, &str)> =
                    names.chunks(2).map(|c| (c[0].trim_end_matches('\''), c[1].as_str())).collect();
                space_split(&first()?, Frame::default(), &pairs)
            }
            "conj" => conjugate(&first()?),
            "ratio" => {
                if args.len() != 2 {
                    return Err(Error::IllFormed("ratio takes two arguments".into()));
                }
                let x = self.expr_arg(&args[0])?;
                let y = self.expr_arg(&args[1])?;
                let r = linear::ratio(&x, &y)
                    .ok_or_else(|| Error::IllFormed("arguments of ratio are not proportional".into()))?;
                self.notes.borrow_mut().push(format!("ratio = {r}"));
                Ok(Expression::scalar(r))
            }
            "solve" => {
                let x = first()?;
                let ys: Vec<Expression> = args[1..].iter().map(|a| self.expr_arg(a)).collect::<Result<_>>()?;
                let lambda = linear::solve_combination(&x, &ys)
                    .ok_or_else(|| Error::IllFormed("no combination matches".into()))?;
                let shown: Vec<String> = lambda.iter().map(|c| c.to_string()).collect();
                self.notes.borrow_mut().push(format!("solve = [{}]", shown.join(", ")));
                Ok(ys.iter().zip(&lambda).fold(x, |acc, (y, c)| acc.sub(&y.scale(*c))))
            }
            "nullity" => {
                let x = first()?;
                let syms: Vec<_> = args[1..]
                    .iter()
                    .map(|a| {
                        let e = self.expr_arg(a)?;
                        match e.terms.as_slice() {
                            [t] if t.factors.len() == 1 => match t.factors[0].base {
                                Base::Sym(id) => Ok(id),
                                Base::Eps => Err(Error::IllFormed("nullity needs field arguments".into())),
                            },
                            _ => Err(Error::IllFormed("nullity needs field arguments".into())),
                        }
                    })
                    .collect::<Result<_>>()?;
                let n = forced_nullity(&x, syms[0], &syms[1..])?;
                Ok(Expression::scalar(Coeff::int(n as i128)))
            }
            _ => Err(Error::UnknownSymbol(name.to_string())),
        }
    }
}

impl Scope for Env<'_> {
    fn definition(&self, name: &str, indices: &[Index]) -> Option<Result<Expression>> {
        let d = self.defs.get(name)?;
        if indices.is_empty() {
            return Some(Ok(d.expr.clone()));
        }
        if indices.len() != d.formal.len() {
            return Some(Err(Error::IllFormed(format!(
                "{name} takes {} indices, got {}",
                d.formal.len(),
                indices.len()
            ))));
        }
        if d.formal.iter().zip(indices).any(|(f, a)| f.primed != a.primed) {
            return Some(Err(Error::IllFormed(format!("{name}: index chirality mismatch"))));
        }
        Some(Ok(instantiate_traced(&d.expr, &d.formal, indices, &BTreeSet::new())))
    }

    fn is_function(&self, name: &str) -> bool {
        FUNCTIONS.contains(&name)
    }

    fn is_name_arg(&self, name: &str) -> bool {
        !self.defs.contains_key(name)
    }

    fn call(&self, name: &str, args: Vec<Arg>) -> Result<Expression> {
        self.call_inner(name, args)
    }
}

/// Statements with their starting line numbers.
fn statements(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = vec![];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with(char::is_whitespace) {
            if let Some(last) = out.last_mut() {
                last.1.push(' ');
                last.1.push_str(line.trim());
                continue;
            }
        }
        out.push((n + 1, line.trim().to_string()));
    }
    out
}

fn check_well_formed(e: &Expression) -> Result<()> {
    e.validate()?;
    let mut sets = e.terms.iter().map(|t| {
        let mut f = t.free_indices();
        f.sort();
        f
    });
    if let Some(first) = sets.next() {
        if let Some(other) = sets.find(|s| *s != first) {
            return Err(Error::SignatureMismatch(format!("free indices {first:?} vs {other:?}")));
        }
    }
    Ok(())
}

fn expect_zero_assertion(name: &str, e: &Expression) -> (Assertion, Expression) {
    let c = canonicalize(e);
    (Assertion { what: format!("{name} = 0"), passed: c.is_zero(), residual: c.to_string() }, c)
}

/// Run a script against a rule table.
pub fn run_script(check: &str, text: &str, table: &RuleTable) -> Report {
    let mut report = Report {
        check: check.to_string(),
        status: Status::Pass,
        residual: "0".into(),
        trace: vec![],
        assertions: vec![],
        metadata: BTreeMap::new(),
        claimed_zero: vec![],
        error: None,
    };
    if let Err(e) = run_into(check, text, table, &mut report) {
        report.error = Some(e.to_string());
        report.status = Status::Fail;
    }
    if report.assertions.iter().any(|a| !a.passed) {
        report.status = Status::Fail;
    }
    if let Some(a) = report.assertions.iter().find(|a| !a.passed && a.what.ends_with("= 0")) {
        report.residual = a.residual.clone();
    }
    report
}

fn run_into(check: &str, text: &str, table: &RuleTable, report: &mut Report) -> Result<()> {
    let mut env = Env::new(table)?;
    for (line, st) in statements(text) {
        let err = |msg: String| Error::Script { script: check.to_string(), line, msg };
        let (kw, rest) = st.split_once(char::is_whitespace).unwrap_or((st.as_str(), ""));
        let rest = rest.trim();
        match kw {
            "def" | "step" => {
                let (desc, body) = if kw == "step" {
                    let r = rest.strip_prefix('"').ok_or_else(|| err("step needs a quoted description".into()))?;
                    let close = r.find('"').ok_or_else(|| err("unterminated description".into()))?;
                    (Some(r[..close].to_string()), r[close + 1..].trim())
                } else {
                    (None, rest)
                };
                let (head, expr_text) = body.split_once('=').ok_or_else(|| err("expected `=`".into()))?;
                let (name, formal) = parse_header(head).map_err(err)?;
                let expr = env.parse(expr_text).map_err(|e| err(e.to_string()))?;
                check_well_formed(&expr).map_err(|e| err(format!("{name}: {e}")))?;
                if !formal.is_empty() {
                    let mut want = formal.clone();
                    want.sort();
                    let mut got = expr.free_indices();
                    got.sort();
                    if !expr.is_zero() && want != got {
                        return Err(err(format!("{name}: declared indices differ from free indices")));
                    }
                }
                if let Some(d) = desc {
                    report.trace.push(TraceStep { step: d, name: name.clone(), expr: expr.to_string() });
                }
                env.defs.insert(name, Named { formal, expr });
            }
            "rule" => {
                let (name, body) = rest.split_once(':').ok_or_else(|| err("expected `rule NAME: lhs -> rhs`".into()))?;
                let (lhs, rhs) = body.split_once("->").ok_or_else(|| err("expected `->`".into()))?;
                let l = env.parse(lhs).map_err(|e| err(e.to_string()))?;
                let f: Factor = match l.terms.as_slice() {
                    [t] if t.factors.len() == 1 && t.factors[0].derivs.is_empty() && t.coeff.is_one() => {
                        t.factors[0].clone()
                    }
                    _ => return Err(err("rule left side must be a single field".into())),
                };
                let r = env.parse(rhs).map_err(|e| err(e.to_string()))?;
                let formal: Vec<Index> = f.unp.iter().chain(f.pri.iter()).cloned().collect();
                env.rules.insert(name.trim().to_string(), Rule { symbol: f.base, formal, rhs: r });
            }
            "expect_zero" | "expect_nonzero" => {
                let d = env.defs.get(rest).ok_or_else(|| err(format!("unknown name {rest}")))?;
                let (mut a, _) = expect_zero_assertion(rest, &d.expr);
                if kw == "expect_nonzero" {
                    a.passed = !a.passed;
                    a.what = format!("{rest} != 0");
                } else {
                    report.claimed_zero.push(d.expr.clone());
                }
                report.assertions.push(a);
            }
            "expect_absent" => {
                let (n, symbol) = rest.split_once(char::is_whitespace).ok_or_else(|| err("expected NAME SYMBOL".into()))?;
                let d = env.defs.get(n).ok_or_else(|| err(format!("unknown name {n}")))?;
                let c = canonicalize(&d.expr);
                let present = c.terms.iter().any(|t| t.factors.iter().any(|f| !f.is_eps() && f.name() == symbol.trim()));
                report.assertions.push(Assertion {
                    what: format!("no {} in {n}", symbol.trim()),
                    passed: !present,
                    residual: if present { c.to_string() } else { "0".into() },
                });
            }
            "meta" => {
                let (k, v) = rest.split_once('=').ok_or_else(|| err("expected `meta key = value`".into()))?;
                report.metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            _ => return Err(err(format!("unknown statement `{kw}`"))),
        }
    }
    for (k, note) in env.notes.borrow().iter().enumerate() {
        report.metadata.insert(format!("note{k}"), note.clone());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_parsing() {
        let (n, i) = parse_header("E5_{A B}^{C'}").unwrap();
        assert_eq!(n, "E5");
        assert_eq!(i, vec![Index::down("A"), Index::down("B"), Index::up_p("C")]);
        assert_eq!(parse_header("X").unwrap().1, vec![]);
    }

    #[test]
    fn small_script_runs() {
        let s = r#"
def P_{A B} = eps_{A B}
rule DEC: phi_{A A' B} -> sigma_{A' A B} + eps_{A B} sigma_{A'}
step "decompose" X = subst(phi_{A A' B}, DEC) - sigma_{A' A B}
    - P_{A B} sigma_{A'}
expect_zero X
step "ratio" R = ratio(2 tau_{A}, tau_{A})
expect_nonzero R
meta mode = test
"#;
        let r = run_script("t", s, &RuleTable::default());
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.trace.len(), 2);
        assert_eq!(r.metadata["note0"], "ratio = 2");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let r = run_script("t", "def X = tau_{A}\nbogus X\n", &RuleTable::default());
        assert!(!r.passed());
        assert!(r.error.unwrap().contains("line 2"));
    }
}
