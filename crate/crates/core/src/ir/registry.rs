//! The frozen table of field symbols.
//!
//! A symbol is identified by its name together with the number of unprimed
//! and primed slots: `tau_{A A' B'}` and `tau_A` are different symbols. The
//! relative order of primed and unprimed slots carries no meaning, so only
//! the order within each chirality is recorded.

use std::sync::OnceLock;

pub type SymbolId = u16;

#[derive(Clone, Debug)]
pub struct FieldSymbol {
    pub name: &'static str,
    pub n_unprimed: usize,
    pub n_primed: usize,
    /// Groups of unprimed slot positions declared totally symmetric.
    pub sym_unprimed: Vec<Vec<usize>>,
    pub sym_primed: Vec<Vec<usize>>,
    pub charged: bool,
    /// Covariantly constant: every derivative vanishes.
    pub constant: bool,
    /// Name and slot shape of the complex conjugate, when it is registered.
    pub conjugate: Option<(&'static str, usize, usize)>,
}

impl FieldSymbol {
    fn new(name: &'static str, nu: usize, np: usize) -> Self {
        FieldSymbol {
            name,
            n_unprimed: nu,
            n_primed: np,
            sym_unprimed: vec![],
            sym_primed: vec![],
            charged: false,
            constant: false,
            conjugate: None,
        }
    }

    fn sym_u(mut self, g: &[usize]) -> Self {
        self.sym_unprimed.push(g.to_vec());
        self
    }

    fn sym_p(mut self, g: &[usize]) -> Self {
        self.sym_primed.push(g.to_vec());
        self
    }

    fn charged(mut self) -> Self {
        self.charged = true;
        self
    }

    fn constant(mut self) -> Self {
        self.constant = true;
        self
    }

    fn conj(mut self, name: &'static str, nu: usize, np: usize) -> Self {
        self.conjugate = Some((name, nu, np));
        self
    }

    pub fn is_scalar(&self) -> bool {
        self.n_unprimed == 0 && self.n_primed == 0
    }
}

#[derive(Debug)]
pub struct Registry {
    symbols: Vec<FieldSymbol>,
}

impl Registry {
    fn builtin() -> Self {
        let s = FieldSymbol::new;
        let symbols = vec![
            // spin-3/2 field and its irreducible parts
            s("tau", 1, 2).sym_p(&[0, 1]).charged(),
            s("tau", 1, 0).charged(),
            s("sigma", 2, 1).sym_u(&[0, 1]).charged(),
            s("sigma", 0, 1).charged(),
            s("sigma", 1, 0).charged(),
            s("phi", 2, 1).charged(),
            s("chi", 1, 2).charged(),
            // gauge spinors
            s("phi", 1, 0).charged(),
            s("chi", 0, 1).charged(),
            s("chi", 1, 0).charged(),
            // space-spinor parts
            s("t", 3, 0).sym_u(&[0, 1, 2]).charged(),
            s("t", 1, 0).charged(),
            s("s", 3, 0).sym_u(&[0, 1, 2]).charged(),
            s("s", 1, 0).charged(),
            // frame spinor t^{AA'}
            s("t", 1, 1).constant(),
            // curvature and electromagnetic field
            s("Psi", 4, 0).sym_u(&[0, 1, 2, 3]).conj("Psi", 0, 4),
            s("Psi", 0, 4).sym_p(&[0, 1, 2, 3]).conj("Psi", 4, 0),
            s("Phi", 2, 2).sym_u(&[0, 1]).sym_p(&[0, 1]).conj("Phi", 2, 2),
            s("Lambda", 0, 0).conj("Lambda", 0, 0),
            s("F", 2, 0).sym_u(&[0, 1]).conj("F", 0, 2),
            s("F", 0, 2).sym_p(&[0, 1]).conj("F", 2, 0),
            // constants
            s("m", 0, 0).constant().conj("m", 0, 0),
            s("e", 0, 0).constant().conj("e", 0, 0),
            // probes used by the rule-table reality check: a real uncharged
            // vector and a charged scalar
            s("v", 1, 1).conj("v", 1, 1),
            s("psi", 0, 0).charged().conj("psi", 0, 0),
        ];
        Registry { symbols }
    }

    pub fn get(&self, id: SymbolId) -> &FieldSymbol {
        &self.symbols[id as usize]
    }

    pub fn lookup(&self, name: &str, nu: usize, np: usize) -> Option<SymbolId> {
        self.symbols
            .iter()
            .position(|s| s.name == name && s.n_unprimed == nu && s.n_primed == np)
            .map(|p| p as SymbolId)
    }

    pub fn has_name(&self, name: &str) -> bool {
        self.symbols.iter().any(|s| s.name == name)
    }

    pub fn conjugate_of(&self, id: SymbolId) -> Option<SymbolId> {
        let (n, u, p) = self.get(id).conjugate?;
        self.lookup(n, u, p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &FieldSymbol)> {
        self.symbols.iter().enumerate().map(|(i, s)| (i as SymbolId, s))
    }
}

pub fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(Registry::builtin)
}

pub fn sym(name: &str, nu: usize, np: usize) -> SymbolId {
    registry()
        .lookup(name, nu, np)
        .unwrap_or_else(|| panic!("unregistered symbol {name}({nu},{np})"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overloaded_names_resolve_by_shape() {
        let r = registry();
        let a = r.lookup("tau", 1, 2).unwrap();
        let b = r.lookup("tau", 1, 0).unwrap();
        assert_ne!(a, b);
        assert!(r.lookup("tau", 2, 0).is_none());
        assert_eq!(r.get(a).sym_primed, vec![vec![0, 1]]);
    }

    #[test]
    fn conjugates_are_registered() {
        let r = registry();
        for (id, s) in r.iter() {
            if s.conjugate.is_some() {
                let c = r.conjugate_of(id).expect("conjugate registered");
                assert_eq!(r.get(c).n_unprimed, s.n_primed);
            }
        }
    }
}
