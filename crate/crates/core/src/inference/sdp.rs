use serde::{Deserialize, Serialize};

use super::extract::{check_two_slots, ExtractionResult, Family, RANK_TOL};
use crate::error::Result;
use crate::pdm::Pdm;
use crate::tensor::{eig_hermitian, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpConfig {
    pub step: f64,
    pub max_iterations: usize,
    /// Stop once consecutive primal iterates differ by less than this
    /// (Frobenius norm).
    pub tolerance: f64,
    pub rank_tol: f64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        SdpConfig {
            step: 1.0,
            max_iterations: 50_000,
            tolerance: 1e-10,
            rank_tol: RANK_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpOutcome {
    pub extraction: ExtractionResult,
    /// `Tr N_-^T`: total weight of the negative eigenvalues of the
    /// input-transposed solution.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sum of the magnitudes of the negative eigenvalues of `PT_in(m)`.
pub fn negative_part_trace(m: &ComplexMatrix) -> Result<f64> {
    let eig = eig_hermitian(&m.partial_transpose(0)?.hermitian_part())?;
    Ok(eig.values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum())
}

/// Prox of `t * Tr[PT(x)]_-`: shrink negative eigenvalues of `PT(x)` towards zero by `t`.
fn prox(x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(&x.partial_transpose(0)?.hermitian_part())?;
    let shrunk = eig.reconstruct_with(|mu| {
        if mu >= 0.0 {
            mu
        } else if mu < -t {
            mu + t
        } else {
            0.0
        }
    });
    shrunk.partial_transpose(0)
}

/// Least-negative member of the Choi solution family of a two-time PDM:
/// minimizes `Tr N_-^T` over Hermitian `N` with `B vec(N) = vec(R)` and
/// `Tr_out N = I`.
///
/// Douglas-Rachford splitting between the affine family (closed-form
/// projection) and the negative-part penalty (eigenvalue shrinkage). With a
/// full-rank marginal the family is a single point and the plain
/// extraction is returned.
pub fn sdp_least_negative(r: &Pdm, direction: Direction) -> Result<SdpOutcome> {
    sdp_least_negative_with(r, direction, &SdpConfig::default())
}

pub fn sdp_least_negative_with(r: &Pdm, direction: Direction, cfg: &SdpConfig) -> Result<SdpOutcome> {
    check_two_slots(r)?;
    let oriented;
    let r = match direction {
        Direction::Forward => r,
        Direction::Reverse => {
            oriented = r.swap_slots();
            &oriented
        }
    };
    let fam = Family::new(r, cfg.rank_tol)?;
    let mut z = fam.least_norm();
    let mut x = z.clone();
    let mut iterations = 0;
    let mut converged = fam.kernel_dim() == 0;
    // the penalty is invariant under the local change of basis, so the
    // whole iteration runs in the marginal's eigenbasis
    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        x = fam.project(&z);
        let reflected = &x.scale(2.0) - &z;
        let y = prox(&reflected, cfg.step)?;
        let step = &y - &x;
        z = &z + &step;
        converged = step.frobenius_norm() < cfg.tolerance;
    }
    let m = fam.to_original(&x);
    let objective = negative_part_trace(&m)?;
    Ok(SdpOutcome {
        extraction: fam.finish(m)?,
        objective,
        iterations,
        converged,
    })
}
