//! Symbolic two-component spinor expressions.

pub mod canon;
pub mod coeff;
pub mod components;
pub mod expr;
pub mod index;
pub mod jet;
pub mod linear;
pub mod ops;
pub mod parse;
pub mod print;
pub mod registry;

pub use canon::{canonicalize, equal};
pub use coeff::Coeff;
pub use expr::{Base, Deriv, DerivOp, Expression, Factor, Projector, Term};
pub use index::Index;
pub use parse::parse;
pub use jet::{jet_eval, JetAssignment, JetValues};
