//! Spectral and trajectory diagnostics for open quantum dynamics.
//!
//! The crate builds Lindbladians and quantum channels in their usual
//! representations, samples the standard random ensembles, and computes
//! level statistics, form factors, symmetry checks and quantum-jump
//! trajectories on top of them.

pub mod error;
pub mod ghs;
pub mod io;
pub mod kerr;
pub mod linalg;
pub mod opcore;
pub mod ensembles;
pub mod spectra;
pub mod symmetry;

pub use error::{DqcError, Result};
pub use faer::c64;
