//! Dimensional reduction of the Dirac and Dirac-Maxwell theories from 3+1 to
//! 2+1 dimensions by descent along `z`.
//!
//! * [`clifford`]: gamma-matrix representations and the 16-element basis
//! * [`descent`]: the projections `P±`, `κ³`, and the block-diagonal basis
//! * [`lattice`]: periodic grids, spinor fields, FFTs, diagnostics and I/O
//! * [`dirac`]: exact spectral propagation of the free Dirac equation
//! * [`maxwell`]: leapfrog Maxwell solvers and the EEB/BBE split
//! * [`coupled`]: the reduced Dirac-Maxwell system in temporal gauge

pub mod clifford;
pub mod coupled;
pub mod descent;
pub mod dirac;
mod error;
pub mod lattice;
pub mod linalg;
pub mod maxwell;
pub mod par;

pub use error::{Error, Result};
