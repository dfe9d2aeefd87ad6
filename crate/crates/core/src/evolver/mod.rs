//! Flat-space 3+1 evolution of the split system on a periodic line.

pub mod basis;
pub mod convergence;
pub mod gauge;
pub mod sim;
pub mod spectral;
pub mod spinor;
pub mod symbol;

pub use basis::SpatialBasis;
pub use gauge::{apply_gauge, GaugeField, GaugeVariant};
pub use sim::{evolve, Closure, InitMode, Lab, Row, SimConfig, State, TimeSeries};
pub use symbol::{characteristic_speeds, find_symmetrizer, principal_symbol, SymbolParams, Symmetrizer};
