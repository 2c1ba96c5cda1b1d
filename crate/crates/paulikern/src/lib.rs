//! Algebra of non-commuting Pauli projectors for few-body problems.
//!
//! A family of orthogonal projectors `P_1 .. P_N` (one per pair
//! subsystem, each spanned by its forbidden states) generally fails to
//! commute, so the projector onto the union of their ranges is not the
//! sum. This crate implements the machinery around that observation:
//!
//! - [`words`]: the free algebra over idempotent generators, where the
//!   truncated expansion of the complete projector equals
//!   `1 - (1 - P)^m` exactly, order by order.
//! - [`operator`]: dense real-symmetric operators, certified projectors
//!   and a symmetric eigensolver.
//! - [`algebra`]: numeric expansions, the guarded power sequence, kernel
//!   (allowed-subspace) extraction, and executable checks of the
//!   expansion and kernel identities.
//! - [`models`]: seeded random ensembles, the analytic equal-overlap
//!   triple and a three-identical-particle toy model in a product
//!   oscillator basis.
//! - [`opp`]: the orthogonalizing-pseudopotential workflow, solving
//!   `H + lambda P` against the exact projected Hamiltonian.
//! - [`report`]: deterministic JSON report envelopes and sweep tables
//!   for the command-line interface.

pub mod algebra;
pub mod error;
pub mod models;
pub mod operator;
pub mod opp;
pub mod oscillator;
pub mod report;
pub mod words;

pub use error::{Error, Result};
