use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("free-index signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("ill-formed expression: {0}")]
    IllFormed(String),
    #[error("index label collision: {0}")]
    LabelCollision(String),
    #[error("missing jet entry: {0}")]
    MissingJet(String),
    #[error("assignment violates a declared symmetry: {0}")]
    SymmetryViolation(String),
    #[error("missing rule-table entry: {0}")]
    MissingRule(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("rule table: {0}")]
    Table(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("script error in `{script}` line {line}: {msg}")]
    Script { script: String, line: usize, msg: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
