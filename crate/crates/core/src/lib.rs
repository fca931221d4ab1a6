//! Two-universal hashing quantum key distribution.
//!
//! The crate is organised bottom-up:
//!
//! - [`f2`]: bit-packed GF(2) vectors and matrices, invertible sampling,
//!   key schedules and exact counting of full-rank matrices.
//! - [`hashball`]: binary entropy, Hamming balls and the membership
//!   functions `f` (exact) and `g` (from a syndrome only).
//! - [`pauli`]: a small dense statevector oracle for Bell states and
//!   commuting Pauli measurements.
//! - [`protocol`]: Alice/Bob runs of π(n,k,r) with a fast analytic backend and
//!   a statevector backend, batches and transcripts.
//! - [`rates`]: finite-key rates for two-universal hashing and for the
//!   random-sampling baseline, plus the baseline's upper bound.
//! - [`selftest`]: the desk-scale verification suites driven by the CLI.

pub mod error;
pub mod f2;
pub mod hashball;
pub mod pauli;
pub mod protocol;
pub mod rates;
pub mod rng;
pub mod selftest;

pub use error::{Error, Result};

/// Library version, stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
