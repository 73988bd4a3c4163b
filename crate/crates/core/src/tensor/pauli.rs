use num_complex::Complex64;

use super::matrix::{ComplexMatrix, I, ONE, ZERO};
use crate::error::{Error, Result};

/// An n-qubit Pauli word. Digit `k` selects sigma_0..sigma_3 on qubit `k`,
/// qubit 0 being the most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    digits: Vec<u8>,
}

impl PauliString {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d > 3) {
            return Err(Error::InvalidInput(format!("Pauli digit {d} outside 0..=3")));
        }
        Ok(PauliString { digits })
    }

    pub fn identity(n: usize) -> Self {
        PauliString { digits: vec![0; n] }
    }

    /// Inverse of [`PauliString::index`].
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut digits = vec![0u8; n];
        for k in (0..n).rev() {
            digits[k] = (index % 4) as u8;
            index /= 4;
        }
        assert_eq!(index, 0, "index out of range for {n} qubits");
        PauliString { digits }
    }

    /// Base-4 reading of the digits, digit 0 most significant.
    pub fn index(&self) -> usize {
        self.digits.iter().fold(0, |acc, &d| acc * 4 + d as usize)
    }

    /// All 4^n strings in index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n as u32)).map(move |i| PauliString::from_index(n, i))
    }

    pub fn num_qubits(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn is_identity(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Bit mask flipped by the word (sigma_1 and sigma_2 factors).
    fn flip_mask(&self) -> usize {
        let n = self.digits.len();
        self.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 1 || d == 2)
            .fold(0, |m, (k, _)| m | 1 << (n - 1 - k))
    }

    /// Phase picked up by basis column `col`: the word maps `|col>` to
    /// `phase * |col ^ flip_mask>`.
    fn phase(&self, col: usize) -> Complex64 {
        let n = self.digits.len();
        let mut ph = ONE;
        for (k, &d) in self.digits.iter().enumerate() {
            let bit = (col >> (n - 1 - k)) & 1;
            match (d, bit) {
                (2, 0) => ph *= I,
                (2, _) => ph *= -I,
                (3, 1) => ph = -ph,
                _ => {}
            }
        }
        ph
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.digits.len();
        let d = 1usize << n;
        let mask = self.flip_mask();
        let mut m = ComplexMatrix::zeros(&[d]);
        for c in 0..d {
            m[(c ^ mask, c)] = self.phase(c);
        }
        m
    }

    /// `Tr(m * sigma)` without forming sigma.
    pub fn trace_product(&self, m: &ComplexMatrix) -> Complex64 {
        let d = 1usize << self.digits.len();
        assert_eq!(m.dim(), d, "dimension mismatch");
        let mask = self.flip_mask();
        (0..d).map(|c| m[(c, c ^ mask)] * self.phase(c)).sum()
    }

    /// Coarse-grained two-outcome projectors `(I + sigma)/2` and `(I - sigma)/2`.
    pub fn coarse_projectors(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        if self.is_identity() {
            return Err(Error::IdentityPauli);
        }
        let s = self.matrix();
        let id = ComplexMatrix::identity(&[s.dim()]);
        Ok(((&id + &s).scale(0.5), (&id - &s).scale(0.5)))
    }
}

/// Single-qubit Pauli matrix sigma_k, k in 0..=3.
pub fn sigma(k: u8) -> ComplexMatrix {
    PauliString::new(vec![k]).expect("digit in range").matrix()
}

fn qubits_of(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Coefficients `c_i = Tr(m sigma_i)` over all 4^n Pauli words, in index order.
pub fn pauli_coefficients(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = qubits_of(m.dim())?;
    Ok(PauliString::all(n).map(|p| p.trace_product(m)).collect())
}

/// Inverse of [`pauli_coefficients`]: `(1/2^n) sum_i c_i sigma_i`.
pub fn from_pauli_coefficients(coeffs: &[Complex64]) -> Result<ComplexMatrix> {
    let len = coeffs.len();
    if len == 0 || !len.is_power_of_two() || !len.trailing_zeros().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("{len} is not a power of four")));
    }
    let n = (len.trailing_zeros() / 2) as usize;
    let d = 1usize << n;
    let mut m = ComplexMatrix::zeros(&[d]);
    for (i, &c) in coeffs.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let p = PauliString::from_index(n, i);
        let mask = p.flip_mask();
        for col in 0..d {
            m[(col ^ mask, col)] += c * p.phase(col);
        }
    }
    Ok(m.scale(1.0 / d as f64))
}
