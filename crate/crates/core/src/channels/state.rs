use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{eig_hermitian, ComplexMatrix, HERMITIAN_TOL, ONE};

/// Tolerance on unit trace and on negative eigenvalues of a state.
pub const STATE_TOL: f64 = 1e-10;

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    mat: ComplexMatrix,
}

impl QuantumState {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let deviation = mat.hermiticity_defect();
        if deviation > HERMITIAN_TOL * mat.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {deviation:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = eig_hermitian(&mat)?.min();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(QuantumState { mat: mat.hermitian_part() })
    }

    /// Wraps a matrix already known to be a state up to rounding.
    pub(crate) fn from_matrix_unchecked(mat: ComplexMatrix) -> Self {
        QuantumState { mat: mat.hermitian_part() }
    }

    /// `|psi><psi|` for the normalized `psi`.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
        Ok(QuantumState {
            mat: ComplexMatrix::projector(&psi),
        })
    }

    pub fn pure_real(amplitudes: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::pure(&v)
    }

    /// `|k><k|` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Self {
        assert!(k < d, "basis index {k} out of range for dimension {d}");
        let mut m = ComplexMatrix::zeros(&[d]);
        m[(k, k)] = ONE;
        QuantumState { mat: m }
    }

    pub fn maximally_mixed(factors: &[usize]) -> Self {
        let id = ComplexMatrix::identity(factors);
        let d = id.dim() as f64;
        QuantumState { mat: id.scale(1.0 / d) }
    }

    /// `|+><+|`.
    pub fn plus() -> Self {
        QuantumState {
            mat: ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]),
        }
    }

    /// `(|00> + |11>)/sqrt(2)` on two qubits.
    pub fn bell() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::pure_real(&[s, 0.0, 0.0, s])
            .expect("normalized")
            .with_factors(&[2, 2])
            .expect("dim 4")
    }

    /// Random mixed state from a square complex Ginibre matrix: `G G^dagger / Tr`.
    pub fn random_mixed(d: usize, rng: &mut Rng) -> Self {
        let g = ginibre(d, rng);
        let gg = &g * &g.adjoint();
        let tr = gg.trace().re;
        QuantumState::from_matrix_unchecked(gg.scale(1.0 / tr))
    }

    /// Haar-random pure state of dimension `d`.
    pub fn haar_pure(d: usize, rng: &mut Rng) -> Self {
        let v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
        Self::pure(&v).expect("gaussian vector is nonzero almost surely")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn factors(&self) -> &[usize] {
        self.mat.factors()
    }

    pub fn with_factors(self, factors: &[usize]) -> Result<Self> {
        Ok(QuantumState {
            mat: self.mat.with_factors(factors)?,
        })
    }

    pub fn kron(&self, other: &QuantumState) -> QuantumState {
        QuantumState {
            mat: self.mat.kron(&other.mat),
        }
    }

    /// Reduced state on the listed factors.
    pub fn reduce(&self, keep: &[usize]) -> Result<QuantumState> {
        Ok(QuantumState::from_matrix_unchecked(self.mat.partial_trace(keep)?))
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(&self.mat).expect("state is Hermitian").min()
    }

    /// Expectation value `Tr(rho * op)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        (&self.mat * op).trace()
    }
}

pub(crate) fn gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Square matrix of i.i.d. standard complex Gaussians.
pub(crate) fn ginibre(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(&[d]);
    // row-major fill order is part of the reproducibility contract
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] = gaussian(rng);
        }
    }
    m
}
