use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extract::{check_two_slots, RANK_TOL};
use super::sdp::{sdp_least_negative_with, Direction, SdpConfig};
use crate::error::{Error, Result};
use crate::pdm::Pdm;

/// `R` counts as uncorrelated when `max |R - R_1 (x) R_2| <= PRODUCT_TOL`.
pub const PRODUCT_TOL: f64 = 1e-9;

/// The five causal structures between `A` (earlier label) and `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum CausalStructure {
    /// `A -> B`.
    AToB = 1,
    /// `B -> A`.
    BToA = 2,
    CommonCause = 3,
    AToBWithCommonCause = 4,
    BToAWithCommonCause = 5,
}

impl CausalStructure {
    pub const ALL: [CausalStructure; 5] = [
        CausalStructure::AToB,
        CausalStructure::BToA,
        CausalStructure::CommonCause,
        CausalStructure::AToBWithCommonCause,
        CausalStructure::BToAWithCommonCause,
    ];

    /// The same structure with the roles of `A` and `B` exchanged.
    pub fn mirrored(self) -> Self {
        use CausalStructure::*;
        match self {
            AToB => BToA,
            BToA => AToB,
            CommonCause => CommonCause,
            AToBWithCommonCause => BToAWithCommonCause,
            BToAWithCommonCause => AToBWithCommonCause,
        }
    }
}

impl From<CausalStructure> for u8 {
    fn from(c: CausalStructure) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for CausalStructure {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        CausalStructure::ALL
            .into_iter()
            .find(|c| *c as u8 == v)
            .ok_or_else(|| Error::InvalidInput(format!("no causal structure numbered {v}")))
    }
}

impl fmt::Display for CausalStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CausalStructure::AToB => "A->B",
            CausalStructure::BToA => "B->A",
            CausalStructure::CommonCause => "common cause",
            CausalStructure::AToBWithCommonCause => "A->B + common cause",
            CausalStructure::BToAWithCommonCause => "B->A + common cause",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `f <= eps_neg` counts as zero negativity.
    pub eps_neg: f64,
    /// A Choi matrix is CP when `min eig(M^T) >= -eps_pos`.
    pub eps_pos: f64,
    /// Marginal eigenvalues at or below this are treated as zero.
    pub rank_tol: f64,
    #[serde(default)]
    pub sdp: SdpConfig,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_neg: 1e-8,
            eps_pos: 1e-8,
            rank_tol: RANK_TOL,
            sdp: SdpConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalVerdict {
    pub compatible: Vec<CausalStructure>,
    /// Causality monotone of the PDM.
    pub f: f64,
    pub min_eig_forward: f64,
    pub min_eig_reverse: f64,
    pub unique_forward: bool,
    pub unique_reverse: bool,
    pub thresholds: Thresholds,
    /// False when `R` factorizes over the two slots.
    pub correlated: bool,
    /// The verdict if the slot labels were the other way round.
    pub reversed: Vec<CausalStructure>,
}

impl CausalVerdict {
    pub fn contains(&self, c: CausalStructure) -> bool {
        self.compatible.contains(&c)
    }

    /// Compatible structures as their numbers 1..=5.
    pub fn numbers(&self) -> Vec<u8> {
        self.compatible.iter().map(|&c| c as u8).collect()
    }
}

/// Smallest eigenvalue of `M^T` for the least-negative Choi matrix in the
/// given direction, and whether that matrix was unique.
fn evidence(r: &Pdm, direction: Direction, th: &Thresholds) -> Result<(f64, bool)> {
    let cfg = SdpConfig {
        rank_tol: th.rank_tol,
        ..th.sdp
    };
    let out = sdp_least_negative_with(r, direction, &cfg)?;
    Ok((out.extraction.min_eig_mt, out.extraction.unique))
}

fn is_product(r: &Pdm) -> Result<bool> {
    let a = r.reduce_slots(&[0])?;
    let b = r.reduce_slots(&[1])?;
    let prod = a.matrix().kron(b.matrix());
    Ok(r.matrix().max_abs_diff(&prod) <= PRODUCT_TOL)
}

/// Runs the three-step protocol on a two-time PDM.
///
/// Zero negativity (or no correlation at all) leaves a common cause.
/// Otherwise the forward and reverse Choi matrices decide: only forward CP
/// gives `A -> B`, only reverse CP gives `B -> A`, both give both, and
/// neither leaves a cause-effect mechanism mixed with a common cause in an
/// unknown direction.
pub fn classify(r: &Pdm, th: &Thresholds) -> Result<CausalVerdict> {
    use CausalStructure::*;
    check_two_slots(r)?;
    let correlated = !is_product(r)?;
    let f = r.negativity();
    let (min_eig_forward, unique_forward) = evidence(r, Direction::Forward, th)?;
    let (min_eig_reverse, unique_reverse) = evidence(r, Direction::Reverse, th)?;
    let compatible = if !correlated || f <= th.eps_neg {
        vec![CommonCause]
    } else {
        match (min_eig_forward >= -th.eps_pos, min_eig_reverse >= -th.eps_pos) {
            (true, false) => vec![AToB],
            (false, true) => vec![BToA],
            (true, true) => vec![AToB, BToA],
            (false, false) => vec![AToBWithCommonCause, BToAWithCommonCause],
        }
    };
    let mut reversed: Vec<CausalStructure> = compatible.iter().map(|c| c.mirrored()).collect();
    reversed.sort();
    Ok(CausalVerdict {
        compatible,
        f,
        min_eig_forward,
        min_eig_reverse,
        unique_forward,
        unique_reverse,
        thresholds: *th,
        correlated,
        reversed,
    })
}

/// [`classify`] over many PDMs in parallel; results keep input order.
pub fn classify_batch(rs: &[Pdm], th: &Thresholds) -> Vec<Result<CausalVerdict>> {
    rs.par_iter().map(|r| classify(r, th)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{QuantumChannel, QuantumState};
    use crate::pdm::{pdm_closed_form, Layout};
    use crate::tensor::ComplexMatrix;

    #[test]
    fn structure_numbers_round_trip() {
        for c in CausalStructure::ALL {
            assert_eq!(CausalStructure::try_from(c as u8).unwrap(), c);
            assert_eq!(c.mirrored().mirrored(), c);
        }
        assert!(CausalStructure::try_from(0).is_err());
        assert_eq!(serde_json::to_string(&vec![CausalStructure::AToBWithCommonCause]).unwrap(), "[4]");
    }

    #[test]
    fn measure_prepare_is_a_to_b() {
        let rho = QuantumState::new(
            &ComplexMatrix::identity(&[2]).scale(0.25) + &QuantumState::plus().into_matrix().scale(0.5),
        )
        .unwrap();
        let r = pdm_closed_form(&rho, &QuantumChannel::measure_prepare_z(), &Layout::single(1)).unwrap();
        let v = classify(&r, &Thresholds::default()).unwrap();
        assert_eq!(v.compatible, vec![CausalStructure::AToB]);
        assert_eq!(v.reversed, vec![CausalStructure::BToA]);
        assert!(v.correlated && v.unique_forward && v.unique_reverse);
    }

    #[test]
    fn product_is_common_cause_only() {
        let r = Pdm::from_factors(ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]).with_factors(&[2, 2]).unwrap())
            .unwrap();
        let v = classify(&r, &Thresholds::default()).unwrap();
        assert_eq!(v.compatible, vec![CausalStructure::CommonCause]);
        assert!(!v.correlated);
    }

    #[test]
    fn verdict_json_fields() {
        let r = Pdm::from_factors(ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]).with_factors(&[2, 2]).unwrap())
            .unwrap();
        let v = classify(&r, &Thresholds::default()).unwrap();
        let json: serde_json::Value = serde_json::to_value(&v).unwrap();
        for key in [
            "compatible",
            "f",
            "min_eig_forward",
            "min_eig_reverse",
            "unique_forward",
            "unique_reverse",
            "thresholds",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["compatible"], serde_json::json!([3]));
        let back: CausalVerdict = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
    }
}
