use crate::channels::{is_cp, QuantumState};
use crate::error::{Error, Result};
use crate::pdm::Pdm;
use crate::tensor::{eig_hermitian, ComplexMatrix, ZERO};

/// A marginal counts as full rank when its smallest eigenvalue exceeds this.
pub const RANK_TOL: f64 = 1e-9;
/// Residual above which a PDM is declared inconsistent with every channel.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// A Choi matrix recovered from a two-time PDM.
#[derive(Clone, Debug)]
pub struct ExtractionResult {
    /// Choi matrix, factors `[dim_in, dim_out]`.
    pub m: ComplexMatrix,
    /// `||B vec(M) - vec(R)||_2`.
    pub residual: f64,
    /// Whether the marginal had full rank, making `M` the only solution.
    pub unique: bool,
    /// Smallest eigenvalue of the input-transposed `M`.
    pub min_eig_mt: f64,
    /// Dimension of the marginal's kernel.
    pub kernel_dim: usize,
}

/// `B = (rho (x) I + I (x) rho^T)/2` with `rho = marginal (x) I_out`, acting
/// on row-major vectorized `D x D` operators. Factors `[D, D]`.
pub fn build_b(marginal: &QuantumState, dim_out: usize) -> ComplexMatrix {
    let rho = marginal
        .matrix()
        .clone()
        .flattened()
        .kron(&ComplexMatrix::identity(&[dim_out]))
        .flattened();
    let id = ComplexMatrix::identity(&[rho.dim()]);
    (&rho.kron(&id) + &id.kron(&rho.transpose())).scale(0.5)
}

/// The affine family `{M : (rho M + M rho)/2 = R, Tr_out M = I}`, written in
/// the eigenbasis of the first-slot marginal, where `B` is diagonal.
///
/// Primed quantities live in that basis: `X' = W^dagger X W`, `W = V (x) I`.
pub(crate) struct Family {
    pub din: usize,
    pub dout: usize,
    w: ComplexMatrix,
    rho: ComplexMatrix,
    r: ComplexMatrix,
    /// Entries fixed by `R`; the kernel-by-kernel block is left at zero.
    fixed: ComplexMatrix,
    in_kernel: Vec<bool>,
}

impl Family {
    pub fn new(r: &Pdm, rank_tol: f64) -> Result<Self> {
        if r.num_slots() != 2 {
            return Err(Error::InvalidPdm(format!(
                "Choi extraction needs exactly two slots, found {}",
                r.num_slots()
            )));
        }
        let din = r.slots()[0].dim();
        let dout = r.slots()[1].dim();
        let marginal = r.marginal(0)?.into_matrix().flattened();
        let eig = eig_hermitian(&marginal)?;
        let w = eig.vectors.kron(&ComplexMatrix::identity(&[dout]));
        let rho = marginal.kron(&ComplexMatrix::identity(&[dout]));
        let rm = r.slot_matrix();
        let rp = &(&w.adjoint() * &rm) * &w;
        let in_kernel: Vec<bool> = eig.values.iter().map(|&l| l <= rank_tol).collect();
        let lambda = &eig.values;
        let fixed = ComplexMatrix::from_fn(&[din, dout], |row, col| {
            let (i, j) = (row / dout, col / dout);
            if in_kernel[i] && in_kernel[j] {
                ZERO
            } else {
                rp[(row, col)] / (0.5 * (lambda[i] + lambda[j]))
            }
        });
        Ok(Family {
            din,
            dout,
            w,
            rho,
            r: rm,
            fixed,
            in_kernel,
        })
    }

    pub fn kernel_dim(&self) -> usize {
        self.in_kernel.iter().filter(|&&k| k).count()
    }

    /// Orthogonal projection of a primed operator onto the family.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let dout = self.dout;
        let mut out = self.fixed.clone();
        let kernel: Vec<usize> = (0..self.din).filter(|&i| self.in_kernel[i]).collect();
        for &i in &kernel {
            for &j in &kernel {
                let mut tr = ZERO;
                for a in 0..dout {
                    for b in 0..dout {
                        let (p, q) = (i * dout + a, j * dout + b);
                        let h = 0.5 * (x[(p, q)] + x[(q, p)].conj());
                        out[(p, q)] = h;
                        if a == b {
                            tr += h;
                        }
                    }
                }
                // shift the block diagonal so that its output trace is delta_ij
                let target = if i == j { 1.0 } else { 0.0 };
                let shift = (tr - target) / dout as f64;
                for a in 0..dout {
                    let p = i * dout + a;
                    out[(p, j * dout + a)] -= shift;
                }
            }
        }
        out
    }

    /// Least-norm member: identity spread evenly over the kernel block.
    pub fn least_norm(&self) -> ComplexMatrix {
        self.project(&ComplexMatrix::zeros(&[self.din, self.dout]))
    }

    pub fn to_original(&self, xp: &ComplexMatrix) -> ComplexMatrix {
        (&(&self.w * xp) * &self.w.adjoint())
            .with_factors(&[self.din, self.dout])
            .expect("dims match")
            .hermitian_part()
    }

    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        let m = m.clone().flattened();
        let bm = (&(&self.rho * &m) + &(&m * &self.rho)).scale(0.5);
        (&bm - &self.r).frobenius_norm()
    }

    /// Packages an original-basis solution, rejecting inconsistent PDMs.
    pub fn finish(&self, m: ComplexMatrix) -> Result<ExtractionResult> {
        let residual = self.residual(&m);
        if residual.is_nan() || residual > RESIDUAL_TOL {
            return Err(Error::Inconsistent { residual });
        }
        let min_eig_mt = is_cp(&m, 0.0)?.min_eigenvalue;
        Ok(ExtractionResult {
            m,
            residual,
            unique: self.kernel_dim() == 0,
            min_eig_mt,
            kernel_dim: self.kernel_dim(),
        })
    }
}

/// Forward Choi matrix from a two-time PDM.
///
/// With a full-rank first-slot marginal the solution is unique. Otherwise
/// the least-norm member of the solution family is returned with
/// `unique = false`; [`super::sdp_least_negative`] searches the family.
pub fn extract_choi(r: &Pdm) -> Result<ExtractionResult> {
    extract_choi_with(r, RANK_TOL)
}

pub fn extract_choi_with(r: &Pdm, rank_tol: f64) -> Result<ExtractionResult> {
    let fam = Family::new(r, rank_tol)?;
    let m = fam.to_original(&fam.least_norm());
    fam.finish(m)
}

/// Choi matrix of the time-reversed PDM, using the later-slot marginal.
pub fn extract_reverse_choi(r: &Pdm) -> Result<ExtractionResult> {
    extract_reverse_choi_with(r, RANK_TOL)
}

pub fn extract_reverse_choi_with(r: &Pdm, rank_tol: f64) -> Result<ExtractionResult> {
    check_two_slots(r)?;
    extract_choi_with(&r.swap_slots(), rank_tol)
}

pub(crate) fn check_two_slots(r: &Pdm) -> Result<()> {
    if r.num_slots() != 2 {
        return Err(Error::InvalidPdm(format!(
            "expected a two-slot PDM, found {} slots",
            r.num_slots()
        )));
    }
    Ok(())
}
