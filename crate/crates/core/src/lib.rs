//! Symbolic verification and numerical experiments for the massive
//! spin-3/2 field on curved and flat backgrounds.

pub mod error;
pub mod curvature;
pub mod derivations;
pub mod evolver;
pub mod cli;
pub mod ir;

pub use error::{Error, Result};
