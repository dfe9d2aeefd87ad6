use std::fmt;

/// Abstract spinor index. The label is stored without the prime mark;
/// `primed` carries the chirality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index {
    pub label: String,
    pub primed: bool,
    pub up: bool,
}

impl Index {
    pub fn new(label: impl Into<String>, primed: bool, up: bool) -> Self {
        Index { label: label.into(), primed, up }
    }

    pub fn down(label: &str) -> Self {
        Index::new(label, false, false)
    }

    pub fn up(label: &str) -> Self {
        Index::new(label, false, true)
    }

    pub fn down_p(label: &str) -> Self {
        Index::new(label, true, false)
    }

    pub fn up_p(label: &str) -> Self {
        Index::new(label, true, true)
    }

    /// Identity of the label irrespective of variance.
    pub fn key(&self) -> (bool, &str) {
        (self.primed, self.label.as_str())
    }

    pub fn flipped(&self) -> Self {
        Index { up: !self.up, ..self.clone() }
    }

    pub fn with_label(&self, label: &str) -> Self {
        Index { label: label.to_string(), ..self.clone() }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primed {
            write!(f, "{}'", self.label)
        } else {
            write!(f, "{}", self.label)
        }
    }
}

/// Free-index signature: sorted list of (primed, label, up).
pub type Signature = Vec<(bool, String, bool)>;

pub fn signature_of<'a>(free: impl IntoIterator<Item = &'a Index>) -> Signature {
    let mut s: Signature = free.into_iter().map(|i| (i.primed, i.label.clone(), i.up)).collect();
    s.sort();
    s
}

/// Supply of fresh labels that avoid a given set.
#[derive(Debug, Default, Clone)]
pub struct LabelSupply {
    used: std::collections::BTreeSet<String>,
    counter: usize,
}

impl LabelSupply {
    pub fn avoiding<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        LabelSupply { used: labels.into_iter().map(str::to_string).collect(), counter: 0 }
    }

    pub fn reserve(&mut self, label: &str) {
        self.used.insert(label.to_string());
    }

    /// Fresh labels look like `X1`, `X2`, ... so they never clash with
    /// the single-letter labels used in source text.
    pub fn fresh(&mut self) -> String {
        loop {
            self.counter += 1;
            let l = format!("X{}", self.counter);
            if self.used.insert(l.clone()) {
                return l;
            }
        }
    }
}
