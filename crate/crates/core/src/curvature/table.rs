//! Convention table: box actions, charge terms, Dirac matrices, metric and
//! volume form.
//!
//! The file format is line oriented: `key = expression`, with `#` starting
//! a comment. Every key of the default table must be present.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_TABLE: &str = include_str!("../../tables/default.tbl");

pub const KEYS: [&str; 13] = [
    "unprimed_box.unprimed_slot",
    "unprimed_box.primed_slot",
    "primed_box.unprimed_slot",
    "primed_box.primed_slot",
    "charge.unprimed_box",
    "charge.primed_box",
    "gamma.upper",
    "gamma.lower",
    "gamma5.upper",
    "gamma5.lower",
    "metric",
    "volume",
    "clifford_sign",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RuleTable {
    entries: BTreeMap<String, String>,
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable::parse(DEFAULT_TABLE).expect("default table parses")
    }
}

impl RuleTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Table(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Table(format!("line {}: unknown key `{k}`", n + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Table(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        let t = RuleTable { entries };
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        RuleTable::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        for k in KEYS {
            self.get(k)?;
        }
        self.clifford_sign()?;
        for k in ["gamma.upper", "gamma.lower", "gamma5.upper", "gamma5.lower", "metric", "volume"] {
            crate::ir::parse(self.get(k)?).map_err(|e| Error::Table(format!("{k}: {e}")))?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.entries.get(key).map(String::as_str).ok_or_else(|| Error::MissingRule(key.to_string()))
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn clifford_sign(&self) -> Result<i128> {
        self.get("clifford_sign")?
            .parse()
            .map_err(|_| Error::Table("clifford_sign must be an integer".into()))
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Every table obtained by flipping exactly one sign: one per top-level
    /// term of each entry. Labels read `key#term`.
    pub fn single_sign_flips(&self) -> Vec<(String, RuleTable)> {
        let mut out = vec![];
        for (k, v) in &self.entries {
            for (n, flipped) in flip_each_term(v).into_iter().enumerate() {
                let mut t = self.clone();
                t.set(k, &flipped);
                out.push((format!("{k}#{n}"), t));
            }
        }
        out
    }
}

/// Copies of `s` with the sign of one top-level term negated.
fn flip_each_term(s: &str) -> Vec<String> {
    let b = s.trim().as_bytes();
    // starts of terms at depth 0: position of a leading sign or of the term
    let mut starts: Vec<(usize, Option<u8>)> = vec![];
    let mut depth = 0i32;
    let mut k = 0;
    if b.first() == Some(&b'-') || b.first() == Some(&b'+') {
        starts.push((0, Some(b[0])));
        k = 1;
    } else {
        starts.push((0, None));
    }
    let mut prev_nonspace = b' ';
    while k < b.len() {
        match b[k] {
            b'(' | b'{' | b'[' => depth += 1,
            b')' | b'}' | b']' => depth -= 1,
            b'+' | b'-' if depth == 0 && prev_nonspace != b'^' && prev_nonspace != b'_' => {
                starts.push((k, Some(b[k])))
            }
            _ => {}
        }
        if !b[k].is_ascii_whitespace() {
            prev_nonspace = b[k];
        }
        k += 1;
    }
    let s = s.trim();
    starts
        .iter()
        .map(|&(pos, sign)| match sign {
            None => format!("-{s}"),
            Some(c) => {
                let r = if c == b'-' { "+" } else { "-" };
                format!("{}{}{}", &s[..pos], r, &s[pos + 1..])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_loads() {
        let t = RuleTable::default();
        assert_eq!(t.clifford_sign().unwrap(), -2);
        assert!(t.get("metric").unwrap().contains("eps"));
    }

    #[test]
    fn unknown_and_missing_keys_rejected() {
        assert!(matches!(RuleTable::parse("bogus = 1"), Err(Error::Table(_))));
        assert!(matches!(RuleTable::parse("metric = eps_{A B} eps_{A' B'}"), Err(Error::MissingRule(_))));
    }

    #[test]
    fn sign_flips_cover_every_term() {
        assert_eq!(flip_each_term("a - 2 b"), vec!["-a - 2 b", "a + 2 b"]);
        assert_eq!(flip_each_term("-i e F_{X Y}"), vec!["+i e F_{X Y}"]);
        assert_eq!(flip_each_term("-2"), vec!["+2"]);
        let t = RuleTable::default();
        // 4 box templates (2+1+1+2 terms), 2 charge, 4 gamma, metric, 2 volume, sign
        assert_eq!(t.single_sign_flips().len(), 6 + 2 + 4 + 1 + 2 + 1);
    }
}
