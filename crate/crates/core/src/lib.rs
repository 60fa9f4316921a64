//! Continuous Galerkin solver and verification suite for viscously regularized ideal MHD.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod flux;
pub mod invariance;
pub mod registry;
pub mod scalar;
pub mod solver;
pub mod sources;
pub mod stabilization;
pub mod state;
pub mod thermo;

pub use error::{MhdError, Result};
