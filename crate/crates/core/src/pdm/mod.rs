//! Pseudo-density matrices over ordered time slots.
//!
//! Every slot is split into parties (`A`, `B`, ...) at construction time, so
//! the underlying matrix carries one tensor factor per (slot, party) pair,
//! earlier slots leftmost. Reductions can then keep any subset of parties.

mod build;

pub use build::{correlator, pdm_closed_form, pdm_from_measurements, pdm_iterative, MAX_ORACLE_QUBITS};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::QuantumState;
use crate::error::{Error, Result};
use crate::tensor::{eig_hermitian, ComplexMatrix, HERMITIAN_TOL, ONE};

/// Tolerance on the unit trace of a PDM.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed negativity of a single-slot marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub label: String,
    pub qubits: usize,
}

impl Party {
    pub fn new(label: &str, qubits: usize) -> Self {
        Party {
            label: label.to_string(),
            qubits,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }
}

/// Party structure shared by every time slot of a PDM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    parties: Vec<Party>,
}

impl Layout {
    pub fn new(parties: Vec<Party>) -> Result<Self> {
        validate_parties(&parties)?;
        Ok(Layout { parties })
    }

    /// One undivided system of `qubits` qubits, labeled `S`.
    pub fn single(qubits: usize) -> Self {
        Layout {
            parties: vec![Party::new("S", qubits)],
        }
    }

    /// Parties `A` and `B`.
    pub fn bipartite(a_qubits: usize, b_qubits: usize) -> Self {
        Layout {
            parties: vec![Party::new("A", a_qubits), Party::new("B", b_qubits)],
        }
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn qubits(&self) -> usize {
        self.parties.iter().map(|p| p.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }

    pub fn factors(&self) -> Vec<usize> {
        self.parties.iter().map(Party::dim).collect()
    }

    pub(crate) fn slots(&self, count: usize) -> Vec<Slot> {
        (0..count)
            .map(|k| Slot {
                label: format!("t{}", k + 1),
                parties: self.parties.clone(),
            })
            .collect()
    }
}

fn validate_parties(parties: &[Party]) -> Result<()> {
    if parties.is_empty() {
        return Err(Error::InvalidPdm("a slot needs at least one party".into()));
    }
    for (k, p) in parties.iter().enumerate() {
        if p.qubits == 0 {
            return Err(Error::InvalidPdm(format!("party `{}` has no qubits", p.label)));
        }
        if parties[..k].iter().any(|q| q.label == p.label) {
            return Err(Error::InvalidPdm(format!("duplicate party label `{}`", p.label)));
        }
    }
    Ok(())
}

/// A time slot: label plus its parties in tensor order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub label: String,
    pub parties: Vec<Party>,
}

impl Slot {
    pub fn qubits(&self) -> usize {
        self.parties.iter().map(|p| p.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }
}

#[derive(Serialize, Deserialize)]
struct SlotJson {
    label: String,
    qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parties: Option<Vec<Party>>,
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SlotJson {
            label: self.label.clone(),
            qubits: self.qubits(),
            parties: (self.parties.len() > 1).then(|| self.parties.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Slot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SlotJson::deserialize(d)?;
        let parties = raw
            .parties
            .unwrap_or_else(|| vec![Party::new("S", raw.qubits)]);
        let slot = Slot {
            label: raw.label,
            parties,
        };
        if slot.qubits() != raw.qubits {
            return Err(D::Error::custom(format!(
                "slot `{}` declares {} qubits but its parties hold {}",
                slot.label,
                raw.qubits,
                slot.qubits()
            )));
        }
        Ok(slot)
    }
}

/// A pseudo-density matrix: Hermitian, unit trace, possibly indefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct Pdm {
    mat: ComplexMatrix,
    slots: Vec<Slot>,
}

impl Pdm {
    /// Validates Hermiticity, unit trace, the factor layout, and positivity
    /// of every single-slot marginal.
    pub fn new(mat: ComplexMatrix, slots: Vec<Slot>) -> Result<Self> {
        let pdm = Pdm::checked_layout(mat, slots)?;
        for k in 0..pdm.slots.len() {
            let min = eig_hermitian(pdm.reduce_slots(&[k])?.matrix())?.min();
            if min < -MARGINAL_TOL {
                return Err(Error::InvalidPdm(format!(
                    "marginal on slot `{}` has eigenvalue {min:.3e}",
                    pdm.slots[k].label
                )));
            }
        }
        Ok(pdm)
    }

    /// Treats a density matrix (or any operator) with one slot per tensor
    /// factor, labeled `t1, t2, ...`. Factors must be powers of two.
    pub fn from_factors(mat: ComplexMatrix) -> Result<Self> {
        let slots = mat
            .factors()
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                if !d.is_power_of_two() || d < 2 {
                    return Err(Error::NotPowerOfTwo(d));
                }
                Ok(Slot {
                    label: format!("t{}", k + 1),
                    parties: vec![Party::new("S", d.trailing_zeros() as usize)],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Pdm::new(mat, slots)
    }

    fn checked_layout(mat: ComplexMatrix, slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidPdm("no time slots".into()));
        }
        for s in &slots {
            validate_parties(&s.parties)?;
        }
        let expect: Vec<usize> = slots
            .iter()
            .flat_map(|s| s.parties.iter().map(Party::dim))
            .collect();
        let mat = if mat.factors() == expect.as_slice() {
            mat
        } else if mat.dim() == expect.iter().product::<usize>() {
            mat.with_factors(&expect)?
        } else {
            return Err(Error::DimensionMismatch(format!(
                "matrix of dim {} does not match slot layout {expect:?}",
                mat.dim()
            )));
        };
        let deviation = mat.hermiticity_defect();
        if deviation > HERMITIAN_TOL * mat.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidPdm(format!("trace {tr} is not 1")));
        }
        Ok(Pdm {
            mat: mat.hermitian_part(),
            slots,
        })
    }

    pub(crate) fn from_parts_unchecked(mat: ComplexMatrix, slots: Vec<Slot>) -> Self {
        Pdm {
            mat: mat.hermitian_part(),
            slots,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    fn factor_index(&self, slot: usize, party: usize) -> Result<usize> {
        let s = self
            .slots
            .get(slot)
            .ok_or_else(|| Error::InvalidInput(format!("no slot {slot}")))?;
        if party >= s.parties.len() {
            return Err(Error::InvalidInput(format!(
                "slot `{}` has no party {party}",
                s.label
            )));
        }
        Ok(self.slots[..slot].iter().map(|s| s.parties.len()).sum::<usize>() + party)
    }

    /// Finds `(slot, party)` indices by label.
    pub fn locate(&self, slot: &str, party: &str) -> Result<(usize, usize)> {
        let si = self
            .slots
            .iter()
            .position(|s| s.label == slot)
            .ok_or_else(|| Error::InvalidInput(format!("no slot labeled `{slot}`")))?;
        let pi = self.slots[si]
            .parties
            .iter()
            .position(|p| p.label == party)
            .ok_or_else(|| {
                Error::InvalidInput(format!("slot `{slot}` has no party `{party}`"))
            })?;
        Ok((si, pi))
    }

    /// Partial trace keeping the listed `(slot, party)` pairs. Slots left
    /// without parties disappear; order is preserved.
    pub fn reduce(&self, keep: &[(usize, usize)]) -> Result<Pdm> {
        if keep.is_empty() {
            return Err(Error::InvalidInput("reduce needs at least one party to keep".into()));
        }
        let mut factors = Vec::with_capacity(keep.len());
        for &(s, p) in keep {
            factors.push(self.factor_index(s, p)?);
        }
        let mat = self.mat.partial_trace(&factors)?;
        let slots = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(si, s)| {
                let parties: Vec<Party> = s
                    .parties
                    .iter()
                    .enumerate()
                    .filter(|(pi, _)| keep.contains(&(si, *pi)))
                    .map(|(_, p)| p.clone())
                    .collect();
                (!parties.is_empty()).then(|| Slot {
                    label: s.label.clone(),
                    parties,
                })
            })
            .collect();
        Ok(Pdm::from_parts_unchecked(mat, slots))
    }

    /// Keeps whole slots.
    pub fn reduce_slots(&self, keep: &[usize]) -> Result<Pdm> {
        let mut pairs = Vec::new();
        for &s in keep {
            let n = self
                .slots
                .get(s)
                .ok_or_else(|| Error::InvalidInput(format!("no slot {s}")))?
                .parties
                .len();
            pairs.extend((0..n).map(|p| (s, p)));
        }
        self.reduce(&pairs)
    }

    /// [`Pdm::reduce`] addressed by `(slot label, party label)`.
    pub fn reduce_labels(&self, keep: &[(&str, &str)]) -> Result<Pdm> {
        let pairs = keep
            .iter()
            .map(|(s, p)| self.locate(s, p))
            .collect::<Result<Vec<_>>>()?;
        self.reduce(&pairs)
    }

    /// Reduced state on one slot, factored by party.
    pub fn marginal(&self, slot: usize) -> Result<QuantumState> {
        let r = self.reduce_slots(&[slot])?;
        let min = eig_hermitian(&r.mat)?.min();
        if min < -MARGINAL_TOL {
            return Err(Error::InvalidPdm(format!(
                "marginal on slot {slot} has eigenvalue {min:.3e}"
            )));
        }
        Ok(QuantumState::from_matrix_unchecked(r.mat))
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.mat).expect("PDM is Hermitian").values
    }

    /// Causality monotone `f(R) = ||R||_tr - 1`.
    pub fn negativity(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum::<f64>() - 1.0
    }

    /// `S R S^dagger` for the swap of the two slots; slot order flips with it.
    pub fn time_reverse(&self) -> Result<Pdm> {
        if self.slots.len() != 2 {
            return Err(Error::InvalidPdm(format!(
                "time reversal needs exactly two slots, found {}",
                self.slots.len()
            )));
        }
        if self.slots[0].dim() != self.slots[1].dim() {
            return Err(Error::DimensionMismatch(format!(
                "slot dimensions {} and {} differ",
                self.slots[0].dim(),
                self.slots[1].dim()
            )));
        }
        Ok(self.swap_slots())
    }

    /// Exchanges the two slots without requiring equal dimensions.
    pub(crate) fn swap_slots(&self) -> Pdm {
        let n0 = self.slots[0].parties.len();
        let n = self.mat.factors().len();
        let order: Vec<usize> = (n0..n).chain(0..n0).collect();
        let mat = self.mat.permute_factors(&order).expect("valid permutation");
        let slots = vec![self.slots[1].clone(), self.slots[0].clone()];
        Pdm::from_parts_unchecked(mat, slots)
    }

    /// Same matrix, all parties of each slot merged into one factor.
    pub fn slot_matrix(&self) -> ComplexMatrix {
        let f: Vec<usize> = self.slots.iter().map(Slot::dim).collect();
        self.mat.clone().with_factors(&f).expect("slot dims multiply to dim")
    }
}

#[derive(Serialize, Deserialize)]
struct PdmJson {
    #[serde(flatten)]
    matrix: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slots: Option<Vec<Slot>>,
}

impl Serialize for Pdm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PdmJson {
            matrix: self.mat.clone(),
            slots: Some(self.slots.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pdm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PdmJson::deserialize(d)?;
        match raw.slots {
            Some(slots) => Pdm::new(raw.matrix, slots),
            None => Pdm::from_factors(raw.matrix),
        }
        .map_err(D::Error::custom)
    }
}
