//! Pseudo-density matrices (PDMs) for multi-qubit systems observed at several
//! times, and the causal-structure inference built on them.
//!
//! The crate is organized bottom-up:
//!
//! - [`tensor`]: dense complex matrices, Pauli words, eigen/SVD kernels.
//! - [`channels`]: states, channels, Choi matrices, semicausal dilations,
//!   Haar sampling.
//! - [`pdm`]: PDM construction (measurement simulation, closed form,
//!   iteration), marginals, negativity and time reversal.
//! - [`inference`]: forward/reverse Choi extraction, the least-negative
//!   completion solver, and five-way causal classification.

pub mod channels;
pub mod error;
pub mod inference;
pub mod pdm;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
