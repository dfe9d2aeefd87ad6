//! Terms, factors and expressions of the abstract-index IR.

use std::collections::{BTreeMap, BTreeSet};

use super::coeff::Coeff;
use super::index::{signature_of, Index, LabelSupply, Signature};
use super::registry::{registry, SymbolId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DerivOp {
    /// Covariant derivative ∇_{AA'}; successive ones do not commute.
    Nabla,
    /// Time derivative ∂ of the space-spinor split.
    Dt,
    /// Spatial derivative ∂_{AB} (symmetric).
    DS,
    /// Curvature derivation □_{AB}.
    BoxU,
    /// Curvature derivation □_{A'B'}.
    BoxP,
}

impl DerivOp {
    pub fn shape(self) -> (usize, usize) {
        match self {
            DerivOp::Nabla => (1, 1),
            DerivOp::Dt => (0, 0),
            DerivOp::DS | DerivOp::BoxU => (2, 0),
            DerivOp::BoxP => (0, 2),
        }
    }

    /// Flat-space operators, which commute with each other.
    pub fn is_flat(self) -> bool {
        matches!(self, DerivOp::Dt | DerivOp::DS)
    }

    pub fn is_box(self) -> bool {
        matches!(self, DerivOp::BoxU | DerivOp::BoxP)
    }

    /// Slots of the operator are symmetric.
    pub fn is_symmetric(self) -> bool {
        matches!(self, DerivOp::DS | DerivOp::BoxU | DerivOp::BoxP)
    }

    pub fn token(self) -> &'static str {
        match self {
            DerivOp::Nabla => "nabla",
            DerivOp::Dt => "dt",
            DerivOp::DS => "dS",
            DerivOp::BoxU => "boxU",
            DerivOp::BoxP => "boxP",
        }
    }

    pub fn from_token(t: &str) -> Option<DerivOp> {
        Some(match t {
            "nabla" => DerivOp::Nabla,
            "dt" => DerivOp::Dt,
            "dS" => DerivOp::DS,
            "boxU" => DerivOp::BoxU,
            "boxP" => DerivOp::BoxP,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Deriv {
    pub op: DerivOp,
    pub unp: Vec<Index>,
    pub pri: Vec<Index>,
}

impl Deriv {
    pub fn new(op: DerivOp, unp: Vec<Index>, pri: Vec<Index>) -> Self {
        Deriv { op, unp, pri }
    }

    pub fn nabla(a: Index, ap: Index) -> Self {
        Deriv::new(DerivOp::Nabla, vec![a], vec![ap])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Eps,
    Sym(SymbolId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub base: Base,
    /// Outermost operator first.
    pub derivs: Vec<Deriv>,
    pub unp: Vec<Index>,
    pub pri: Vec<Index>,
}

impl Factor {
    pub fn field(id: SymbolId, unp: Vec<Index>, pri: Vec<Index>) -> Self {
        Factor { base: Base::Sym(id), derivs: vec![], unp, pri }
    }

    pub fn eps(a: Index, b: Index) -> Self {
        assert_eq!(a.primed, b.primed);
        if a.primed {
            Factor { base: Base::Eps, derivs: vec![], unp: vec![], pri: vec![a, b] }
        } else {
            Factor { base: Base::Eps, derivs: vec![], unp: vec![a, b], pri: vec![] }
        }
    }

    pub fn is_eps(&self) -> bool {
        self.base == Base::Eps
    }

    pub fn name(&self) -> &'static str {
        match self.base {
            Base::Eps => "eps",
            Base::Sym(id) => registry().get(id).name,
        }
    }

    /// Every index of the factor: derivative slots outermost first, then
    /// the field's unprimed and primed slots.
    pub fn slots(&self) -> impl Iterator<Item = &Index> {
        self.derivs
            .iter()
            .flat_map(|d| d.unp.iter().chain(d.pri.iter()))
            .chain(self.unp.iter())
            .chain(self.pri.iter())
    }

    pub fn slots_mut(&mut self) -> impl Iterator<Item = &mut Index> {
        self.derivs
            .iter_mut()
            .flat_map(|d| d.unp.iter_mut().chain(d.pri.iter_mut()))
            .chain(self.unp.iter_mut())
            .chain(self.pri.iter_mut())
    }

    pub fn is_constant(&self) -> bool {
        match self.base {
            Base::Eps => true,
            Base::Sym(id) => registry().get(id).constant,
        }
    }

    fn check_shape(&self) -> Result<()> {
        match self.base {
            Base::Eps => {
                let ok = (self.unp.len() == 2 && self.pri.is_empty())
                    || (self.pri.len() == 2 && self.unp.is_empty());
                if !ok {
                    return Err(Error::IllFormed("eps needs two indices of equal chirality".into()));
                }
            }
            Base::Sym(id) => {
                let s = registry().get(id);
                if s.n_unprimed != self.unp.len() || s.n_primed != self.pri.len() {
                    return Err(Error::IllFormed(format!("wrong slot count for {}", s.name)));
                }
            }
        }
        for d in &self.derivs {
            let (u, p) = d.op.shape();
            if d.unp.len() != u || d.pri.len() != p {
                return Err(Error::IllFormed(format!("wrong slot count on {}", d.op.token())));
            }
        }
        if self.unp.iter().any(|i| i.primed) || self.pri.iter().any(|i| !i.primed) {
            return Err(Error::IllFormed("slot chirality mismatch".into()));
        }
        Ok(())
    }
}

/// Unexpanded (anti)symmetrization over a set of labels of one chirality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Projector {
    pub labels: Vec<(bool, String)>,
    pub anti: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Coeff,
    pub factors: Vec<Factor>,
    pub projectors: Vec<Projector>,
}

impl Term {
    pub fn new(coeff: Coeff, factors: Vec<Factor>) -> Self {
        Term { coeff, factors, projectors: vec![] }
    }

    pub fn scalar(c: Coeff) -> Self {
        Term::new(c, vec![])
    }

    pub fn all_indices(&self) -> impl Iterator<Item = &Index> {
        self.factors.iter().flat_map(|f| f.slots())
    }

    /// Occurrences of each label, keyed by (primed, label).
    pub fn label_counts(&self) -> BTreeMap<(bool, String), Vec<bool>> {
        let mut m: BTreeMap<(bool, String), Vec<bool>> = BTreeMap::new();
        for i in self.all_indices() {
            m.entry((i.primed, i.label.clone())).or_default().push(i.up);
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        for f in &self.factors {
            f.check_shape()?;
        }
        for ((p, l), ups) in self.label_counts() {
            let name = if p { format!("{l}'") } else { l.clone() };
            match ups.len() {
                1 => {}
                2 if ups[0] != ups[1] => {}
                2 => return Err(Error::IllFormed(format!("dummy {name} must occur once up, once down"))),
                _ => return Err(Error::IllFormed(format!("index {name} occurs {} times", ups.len()))),
            }
        }
        Ok(())
    }

    pub fn free_indices(&self) -> Vec<Index> {
        let counts = self.label_counts();
        let mut out: Vec<Index> = counts
            .into_iter()
            .filter(|(_, v)| v.len() == 1)
            .map(|((p, l), v)| Index::new(l, p, v[0]))
            .collect();
        out.sort();
        out
    }

    pub fn dummy_labels(&self) -> BTreeSet<(bool, String)> {
        self.label_counts().into_iter().filter(|(_, v)| v.len() == 2).map(|(k, _)| k).collect()
    }

    pub fn relabel(&mut self, map: &BTreeMap<(bool, String), String>) {
        for f in &mut self.factors {
            for i in f.slots_mut() {
                if let Some(n) = map.get(&(i.primed, i.label.clone())) {
                    i.label = n.clone();
                }
            }
        }
        for p in &mut self.projectors {
            for (pr, l) in &mut p.labels {
                if let Some(n) = map.get(&(*pr, l.clone())) {
                    *l = n.clone();
                }
            }
        }
    }

    /// Rename every dummy of `self` so it avoids `avoid`.
    pub fn freshen_dummies(&mut self, avoid: &BTreeSet<String>) {
        let dummies = self.dummy_labels();
        if dummies.iter().all(|(_, l)| !avoid.contains(l)) {
            return;
        }
        let mut supply = LabelSupply::avoiding(avoid.iter().map(String::as_str));
        for i in self.all_indices() {
            supply.reserve(&i.label);
        }
        let mut map = BTreeMap::new();
        for (p, l) in dummies {
            if avoid.contains(&l) {
                map.insert((p, l), supply.fresh());
            }
        }
        self.relabel(&map);
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.all_indices().map(|i| i.label.clone()).collect()
    }

    /// Product with Einstein summation over shared free labels.
    pub fn mul(&self, other: &Term) -> Term {
        let mut rhs = other.clone();
        rhs.freshen_dummies(&self.labels());
        let mut lhs = self.clone();
        lhs.freshen_dummies(&rhs.labels());
        let mut factors = lhs.factors;
        factors.extend(rhs.factors);
        let mut projectors = lhs.projectors;
        projectors.extend(rhs.projectors);
        Term { coeff: lhs.coeff * rhs.coeff, factors, projectors }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Expression {
    pub terms: Vec<Term>,
}

impl Expression {
    pub fn zero() -> Self {
        Expression { terms: vec![] }
    }

    pub fn scalar(c: Coeff) -> Self {
        if c.is_zero() {
            Expression::zero()
        } else {
            Expression { terms: vec![Term::scalar(c)] }
        }
    }

    pub fn from_term(t: Term) -> Self {
        if t.coeff.is_zero() {
            Expression::zero()
        } else {
            Expression { terms: vec![t] }
        }
    }

    pub fn from_factor(f: Factor) -> Self {
        Expression::from_term(Term::new(Coeff::one(), vec![f]))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Free-index signature, `None` for the zero expression.
    pub fn signature(&self) -> Option<Signature> {
        self.terms.first().map(|t| signature_of(&t.free_indices()))
    }

    pub fn free_indices(&self) -> Vec<Index> {
        self.terms.first().map(|t| t.free_indices()).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let mut sig: Option<Signature> = None;
        for t in &self.terms {
            t.validate()?;
            let s = signature_of(&t.free_indices());
            match &sig {
                None => sig = Some(s),
                Some(s0) if *s0 != s => {
                    return Err(Error::SignatureMismatch(format!(
                        "{} vs {}",
                        fmt_sig(s0),
                        fmt_sig(&s)
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.terms.iter().flat_map(|t| t.labels()).collect()
    }

    pub fn scale(&self, c: Coeff) -> Expression {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coeff: t.coeff * c, ..t.clone() })
                .collect(),
        }
    }

    pub fn neg(&self) -> Expression {
        self.scale(-Coeff::one())
    }

    pub fn add(&self, other: &Expression) -> Expression {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expression { terms }
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        self.add(&other.neg())
    }

    /// Product. Projectors are expanded first: a label symmetrized in one
    /// factor may become a dummy of the product.
    pub fn mul(&self, other: &Expression) -> Expression {
        let has_proj = |e: &Expression| e.terms.iter().any(|t| !t.projectors.is_empty());
        let lhs = if has_proj(self) { super::ops::expand_projectors(self) } else { self.clone() };
        let rhs = if has_proj(other) { super::ops::expand_projectors(other) } else { other.clone() };
        let mut terms = Vec::with_capacity(lhs.terms.len() * rhs.terms.len());
        for a in &lhs.terms {
            for b in &rhs.terms {
                terms.push(a.mul(b));
            }
        }
        Expression { terms }
    }

    pub fn relabel(&self, map: &BTreeMap<(bool, String), String>) -> Expression {
        let mut e = self.clone();
        for t in &mut e.terms {
            t.relabel(map);
        }
        e
    }

    /// True when some factor of some term has base `id`.
    pub fn mentions(&self, id: SymbolId) -> bool {
        self.terms.iter().any(|t| t.factors.iter().any(|f| f.base == Base::Sym(id)))
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Expression) -> Expression {
        let mut out = Expression::zero();
        for t in &self.terms {
            out.terms.extend(f(t).terms);
        }
        out
    }
}

pub fn fmt_sig(s: &Signature) -> String {
    let parts: Vec<String> = s
        .iter()
        .map(|(p, l, up)| format!("{}{}{}", if *up { "^" } else { "_" }, l, if *p { "'" } else { "" }))
        .collect();
    format!("[{}]", parts.join(" "))
}
