//! Quantum energy teleportation (QET) laboratory.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] is a small finite-dimensional toolkit for qubit registers:
//!   state vectors, site-local operators, POVM measurements, ground states,
//!   reduced density operators and entropies.
//! * [`minimal`] is the two-qubit model with its closed-form energies and a
//!   brute-force protocol run that must reproduce them.
//! * [`chain`] is the general nearest-neighbour chain engine: energy-density
//!   normalisation, POVM protocol execution, residual energy and multi-site
//!   energy distribution.
//! * [`ising`] specialises the chain engine to the critical transverse-field
//!   Ising chain and evaluates its analytic infinite-chain formulas.
//! * [`field`] evaluates the continuum protocol for a massless chiral field
//!   from sampled profile functions, with a finite-mode Gaussian oracle.
//!
//! Bit order: site 0 is the most significant bit of a basis-state index.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod field;
pub mod ising;
pub mod minimal;
pub mod optimize;
pub mod quantum;

pub use error::{Error, Result};
pub use quantum::{C64, CMatrix, CVector};

/// Absolute tolerance for construction invariants (norms, Hermiticity).
pub const TOL_CONSTRUCT: f64 = 1e-12;
/// Absolute tolerance for algebraic identities between two routes.
pub const TOL_IDENTITY: f64 = 1e-10;
/// Residual bound accepted from the ground-state eigensolver.
pub const TOL_EIGEN_RESIDUAL: f64 = 1e-9;
