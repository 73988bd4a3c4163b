use num_complex::Complex64;
use rayon::prelude::*;

use super::{Layout, Pdm};
use crate::channels::{QuantumChannel, QuantumState};
use crate::error::{Error, Result};
use crate::tensor::{from_pauli_coefficients, ComplexMatrix, PauliString};

/// Largest `m * n` the measurement oracle accepts (4^6 Pauli tuples).
pub const MAX_ORACLE_QUBITS: usize = 6;

fn check_inputs(rho1: &QuantumState, channels: &[QuantumChannel], layout: &Layout) -> Result<()> {
    let d = layout.dim();
    if rho1.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "initial state has dim {}, layout has dim {d}",
            rho1.dim()
        )));
    }
    for (k, ch) in channels.iter().enumerate() {
        if ch.dim_in() != d || ch.dim_out() != d {
            return Err(Error::DimensionMismatch(format!(
                "channel {k} maps dim {} to {}, layout needs {d} to {d}",
                ch.dim_in(),
                ch.dim_out()
            )));
        }
    }
    Ok(())
}

/// Multi-time expectation `<sigma_1, ..., sigma_m>` of coarse-grained Pauli
/// measurements, one string per slot, with `channels[k]` acting between
/// slots `k` and `k + 1`.
///
/// Each non-identity measurement replaces the running operator `X` by
/// `P+ X P+ - P- X P-`, which carries the outcome sign forward.
pub fn correlator(
    rho1: &QuantumState,
    channels: &[QuantumChannel],
    strings: &[PauliString],
) -> Result<Complex64> {
    if strings.len() != channels.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "{} Pauli strings for {} slots",
            strings.len(),
            channels.len() + 1
        )));
    }
    let mut x = rho1.matrix().clone().flattened();
    for (ch, p) in channels.iter().zip(strings) {
        if !p.is_identity() {
            let (plus, minus) = p.coarse_projectors()?;
            x = &(&(&plus * &x) * &plus) - &(&(&minus * &x) * &minus);
        }
        x = ch.apply_operator(&x)?.flattened();
    }
    Ok(strings[strings.len() - 1].trace_product(&x))
}

/// Measurement-simulation oracle: enumerates every Pauli tuple and
/// assembles `R = 2^{-mn} sum <sigma_1..sigma_m> sigma_1 (x) ... (x) sigma_m`.
pub fn pdm_from_measurements(
    rho1: &QuantumState,
    channels: &[QuantumChannel],
    layout: &Layout,
) -> Result<Pdm> {
    check_inputs(rho1, channels, layout)?;
    let n = layout.qubits();
    let m = channels.len() + 1;
    if m * n > MAX_ORACLE_QUBITS {
        return Err(Error::TooLarge(format!(
            "{m} slots of {n} qubits need 4^{} Pauli tuples; the oracle is capped at m*n <= {MAX_ORACLE_QUBITS}",
            m * n
        )));
    }
    let coeffs = (0..1usize << (2 * m * n))
        .into_par_iter()
        .map(|index| {
            let word = PauliString::from_index(m * n, index);
            let strings: Vec<PauliString> = word
                .digits()
                .chunks(n)
                .map(|c| PauliString::new(c.to_vec()))
                .collect::<Result<_>>()?;
            correlator(rho1, channels, &strings)
        })
        .collect::<Result<Vec<_>>>()?;
    let mat = from_pauli_coefficients(&coeffs)?;
    slotted(mat, layout, m)
}

fn slotted(mat: ComplexMatrix, layout: &Layout, m: usize) -> Result<Pdm> {
    let factors: Vec<usize> = (0..m).flat_map(|_| layout.factors()).collect();
    Ok(Pdm::from_parts_unchecked(mat.with_factors(&factors)?, layout.slots(m)))
}

fn two_slot_choi(ch: &QuantumChannel, layout: &Layout) -> Result<ComplexMatrix> {
    let f = layout.factors();
    ch.choi().with_factors(&[f.clone(), f].concat())
}

/// Two-time PDM `R = (M rho + rho M)/2` with `rho = rho1 (x) I`.
pub fn pdm_closed_form(rho1: &QuantumState, ch: &QuantumChannel, layout: &Layout) -> Result<Pdm> {
    check_inputs(rho1, std::slice::from_ref(ch), layout)?;
    let f = layout.factors();
    let m = two_slot_choi(ch, layout)?;
    let rho = rho1
        .matrix()
        .clone()
        .with_factors(&f)?
        .kron(&ComplexMatrix::identity(&f));
    let mat = (&(&m * &rho) + &(&rho * &m)).scale(0.5);
    slotted(mat, layout, 2)
}

/// m-time PDM by the recursion
/// `R_{1..k+1} = (R_{1..k} M_{k,k+1} + M_{k,k+1} R_{1..k})/2`,
/// with both factors padded by identities.
pub fn pdm_iterative(
    rho1: &QuantumState,
    channels: &[QuantumChannel],
    layout: &Layout,
) -> Result<Pdm> {
    let (first, rest) = channels
        .split_first()
        .ok_or_else(|| Error::InvalidInput("at least one channel is required".into()))?;
    check_inputs(rho1, channels, layout)?;
    let f = layout.factors();
    let np = f.len();
    let mut r = pdm_closed_form(rho1, first, layout)?.into_matrix();
    for ch in rest {
        let m = two_slot_choi(ch, layout)?;
        let big: Vec<usize> = [r.factors(), &f[..]].concat();
        let nb = big.len();
        let targets: Vec<usize> = (nb - 2 * np..nb).collect();
        let left = r.kron(&ComplexMatrix::identity(&f));
        let right = ComplexMatrix::embed(&m, &big, &targets)?;
        r = (&(&left * &right) + &(&right * &left)).scale(0.5);
    }
    slotted(r, layout, channels.len() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::haar_unitary;
    use crate::tensor::{sigma, swap_operator};

    #[test]
    fn maximally_mixed_identity_gives_half_swap() {
        let r = pdm_from_measurements(
            &QuantumState::maximally_mixed(&[2]),
            &[QuantumChannel::identity(2)],
            &Layout::single(1),
        )
        .unwrap();
        assert!(r.matrix().max_abs_diff(&swap_operator(2).scale(0.5)) < 1e-14);
    }

    #[test]
    fn rank_deficient_identity_example() {
        let expect = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ]);
        let rho = QuantumState::basis(2, 0);
        let id = QuantumChannel::identity(2);
        let oracle = pdm_from_measurements(&rho, std::slice::from_ref(&id), &Layout::single(1)).unwrap();
        let closed = pdm_closed_form(&rho, &id, &Layout::single(1)).unwrap();
        assert!(oracle.matrix().max_abs_diff(&expect) < 1e-14);
        assert!(closed.matrix().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn single_slot_is_the_state() {
        let rho = QuantumState::plus();
        let r = pdm_from_measurements(&rho, &[], &Layout::single(1)).unwrap();
        assert!(r.matrix().max_abs_diff(rho.matrix()) < 1e-14);
        assert_eq!(r.num_slots(), 1);
    }

    #[test]
    fn depolarizing_gives_product() {
        let rho = QuantumState::plus();
        let r = pdm_closed_form(&rho, &QuantumChannel::depolarizing(2), &Layout::single(1)).unwrap();
        let expect = rho.matrix().kron(&ComplexMatrix::identity(&[2]).scale(0.5));
        assert!(r.matrix().max_abs_diff(&expect) < 1e-15);
        assert!(r.negativity().abs() < 1e-12);
    }

    #[test]
    fn oracle_cap() {
        let rho = QuantumState::maximally_mixed(&[4]);
        let id = QuantumChannel::identity(4);
        let err = pdm_from_measurements(&rho, &[id.clone(), id.clone(), id], &Layout::single(2));
        assert!(matches!(err, Err(Error::TooLarge(_))));
    }

    #[test]
    fn dimension_checks() {
        let rho = QuantumState::basis(2, 0);
        let ch = QuantumChannel::identity(4);
        assert!(pdm_closed_form(&rho, &ch, &Layout::single(1)).is_err());
        assert!(pdm_iterative(&rho, &[], &Layout::single(1)).is_err());
        let strings = [PauliString::identity(1)];
        assert!(correlator(&rho, &[QuantumChannel::identity(2)], &strings).is_err());
    }

    #[test]
    fn two_time_zz_correlator() {
        // <Z, Z> through the identity is <Z^2> = 1 for any state
        let z = PauliString::new(vec![3]).unwrap();
        let c = correlator(
            &QuantumState::plus(),
            &[QuantumChannel::identity(2)],
            &[z.clone(), z],
        )
        .unwrap();
        assert!((c.re - 1.0).abs() < 1e-15 && c.im.abs() < 1e-15);
    }

    #[test]
    fn iterative_matches_oracle_three_times() {
        let rho = QuantumState::maximally_mixed(&[2]);
        let chans = [QuantumChannel::identity(2), QuantumChannel::identity(2)];
        let it = pdm_iterative(&rho, &chans, &Layout::single(1)).unwrap();
        let or = pdm_from_measurements(&rho, &chans, &Layout::single(1)).unwrap();
        assert!(it.matrix().max_abs_diff(or.matrix()) < 1e-14);

        let u = QuantumChannel::from_unitary(haar_unitary(2, 5)).unwrap();
        let chans = [u, QuantumChannel::measure_prepare_z()];
        let rho = QuantumState::plus();
        let it = pdm_iterative(&rho, &chans, &Layout::single(1)).unwrap();
        let or = pdm_from_measurements(&rho, &chans, &Layout::single(1)).unwrap();
        assert!(it.matrix().max_abs_diff(or.matrix()) < 1e-13);
        let last = it.reduce_slots(&[2]).unwrap();
        let direct = chans[1].apply(&chans[0].apply(&rho).unwrap()).unwrap();
        assert!(last.matrix().max_abs_diff(direct.matrix()) < 1e-13);
    }

    #[test]
    fn measure_prepare_plus_negativity() {
        let r = pdm_closed_form(
            &QuantumState::plus(),
            &QuantumChannel::measure_prepare_z(),
            &Layout::single(1),
        )
        .unwrap();
        assert!((r.negativity() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        // block form: (rho/2 + sigma3/4 + z/4) (x) |0><0| + (rho/2 - sigma3/4 - z/4) (x) |1><1|
        let rho = QuantumState::plus().into_matrix();
        let z = 0.0;
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]);
        let id = ComplexMatrix::identity(&[2]);
        let b0 = &(&rho.scale(0.5) + &sigma(3).scale(0.25)) + &id.scale(z / 4.0);
        let b1 = &(&rho.scale(0.5) - &sigma(3).scale(0.25)) - &id.scale(z / 4.0);
        let expect = &b0.kron(&p0) + &b1.kron(&p1);
        assert!(r.matrix().max_abs_diff(&expect) < 1e-15);
    }
}
