//! Dense complex matrices with tensor-factor bookkeeping, and the kernels
//! built on them.
//!
//! Factor ordering is global: earlier time slots sit left of later ones,
//! party A left of party B within a slot, and qubit 0 is the most
//! significant bit of a flat index.

mod linalg;
mod matrix;
mod pauli;

pub use linalg::{
    eig_hermitian, pseudo_inverse, svd, swap_operator, trace_norm, unvectorize, vectorize,
    HermitianEigen, Svd, DEFAULT_RCOND, HERMITIAN_TOL,
};
pub use matrix::{ComplexMatrix, I, ONE, ZERO};
pub use pauli::{from_pauli_coefficients, pauli_coefficients, sigma, PauliString};
