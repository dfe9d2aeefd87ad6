//! Derivative calculus on the IR: Leibniz rule, commutators of covariant
//! derivatives, curvature derivations and the flat space-spinor split.

pub mod boxes;
pub mod derivs;
pub mod split;
pub mod table;

pub use boxes::{conjugate, expand_box, specialize_zero, FLAT_BACKGROUND};
pub use derivs::{commute_nablas, leibniz_derivative, NablaOrder};
pub use table::RuleTable;
pub use split::{space_split, Frame};
