//! Stationary-distribution toolkit for M/G/1-type Markov chains.
//!
//! The crate solves chains with unbounded level increments by the
//! level-increment (LI) truncation: jump blocks beyond increment `N` are
//! lumped at `N`, the truncated chain is solved exactly with matrix-analytic
//! factors and Ramaswami's recursion, and a verification harness measures
//! how fast the truncated stationary law approaches the original one in
//! total variation — including the comparison of the measured decay ratios
//! against their closed-form limit constant for power-law increment tails.
//!
//! Modules:
//! - [`linalg`]: dense matrices, GTH stationary vectors, `(I-M)X = rhs`
//!   solves, communicating classes and periods.
//! - [`series`]: certified (bracketed) zeta-tail sums.
//! - [`model`]: the chain spec, tail sums, drift diagnostics, JSON format.
//! - [`truncation`]: the LI truncation itself.
//! - [`mam`]: G-matrix, censored boundary factors, R-blocks, the stationary
//!   recursion.
//! - [`tails`]: power-law / integrated-tail distributions and heavy-tail
//!   class diagnostics.
//! - [`verify`]: oracle solver, reference solutions, convergence sweeps and
//!   reports.

pub mod linalg;
pub mod mam;
pub mod model;
pub mod series;
pub mod tails;
pub mod truncation;
pub mod verify;

pub use linalg::{Matrix, ProbVector};
pub use model::Mg1Spec;
pub use truncation::li_truncate;
