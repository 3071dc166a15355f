//! Ground and excited states of one-dimensional quantum systems computed
//! directly in the Wigner phase-space picture.

pub mod error;
pub mod exact;
pub mod fd;
pub mod fem1d;
pub mod hermite;
pub mod jet;
pub mod potentials;
pub mod schrodinger;
pub mod solver;

pub use error::{Error, Result};
