use num_complex::Complex64;
use proptest::prelude::*;

use pdm_causal::channels::{
    haar_unitary_from, is_cp, random_channel, semicausal, QuantumChannel, QuantumState,
};
use pdm_causal::inference::{
    classify, extract_choi, sdp_least_negative, Direction, Thresholds,
};
use pdm_causal::pdm::{pdm_closed_form, Layout, Pdm};
use pdm_causal::rng::{generator, Rng};
use pdm_causal::tensor::{
    eig_hermitian, from_pauli_coefficients, pauli_coefficients, swap_operator, trace_norm,
    vectorize, ComplexMatrix,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn rng(seed: u64) -> Rng {
    generator(seed, 0)
}

fn random_matrix(factors: &[usize], rng: &mut Rng) -> ComplexMatrix {
    use rand::Rng as _;
    ComplexMatrix::from_fn(factors, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_hermitian(factors: &[usize], rng: &mut Rng) -> ComplexMatrix {
    random_matrix(factors, rng).hermitian_part()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn trace_norm_bounds_trace(seed: u64) {
        let mut rng = rng(seed);
        let h = random_hermitian(&[4], &mut rng);
        prop_assert!(trace_norm(&h) >= h.trace().norm() - 1e-12);
        let psd = &h * &h;
        prop_assert!((trace_norm(&psd) - psd.trace().re).abs() < 1e-10);
    }

    #[test]
    fn partial_traces_compose(seed: u64) {
        let m = random_matrix(&[2, 3, 2], &mut rng(seed));
        let once = m.partial_trace(&[1]).unwrap();
        let twice = m.partial_trace(&[1, 2]).unwrap().partial_trace(&[0]).unwrap();
        prop_assert!(once.max_abs_diff(&twice) < 1e-12);
        prop_assert!((m.trace() - m.partial_trace(&[0, 2]).unwrap().trace()).norm() < 1e-12);
    }

    #[test]
    fn vectorization_identity(seed: u64) {
        let mut rng = rng(seed);
        let (x, f, z) = (
            random_matrix(&[4], &mut rng),
            random_matrix(&[4], &mut rng),
            random_matrix(&[4], &mut rng),
        );
        let lhs = vectorize(&(&(&x * &f) * &z));
        let rhs = &x.kron(&z.transpose()) * vectorize(&f).as_slice();
        let dev = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-10);
    }

    #[test]
    fn swap_conjugation_reverses_factors(seed: u64) {
        let mut rng = rng(seed);
        let a = random_matrix(&[2], &mut rng);
        let b = random_matrix(&[2], &mut rng);
        let s = swap_operator(2);
        let lhs = &(&s * &a.kron(&b)) * &s.adjoint();
        prop_assert!(lhs.max_abs_diff(&b.kron(&a)) < 1e-14);
    }

    #[test]
    fn pauli_round_trip(seed: u64) {
        let h = random_hermitian(&[4], &mut rng(seed));
        let back = from_pauli_coefficients(&pauli_coefficients(&h).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn eigendecomposition_reconstructs(seed: u64) {
        let h = random_hermitian(&[8], &mut rng(seed));
        let eig = eig_hermitian(&h).unwrap();
        let scale = eig.values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        prop_assert!(eig.reconstruct_with(|l| l).max_abs_diff(&h) < 1e-9 * 8.0 * scale);
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn choi_and_kraus_act_alike(seed: u64, n in 1usize..=2) {
        let mut rng = rng(seed);
        let d = 1 << n;
        let ch = random_channel(d, 2, &mut rng);
        let via_choi = QuantumChannel::from_choi(ch.choi(), d, d).unwrap();
        let rho = QuantumState::random_mixed(d, &mut rng);
        let a = ch.apply(&rho).unwrap();
        let b = via_choi.apply(&rho).unwrap();
        prop_assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-10);
        let tr_out = ch.choi().partial_trace(&[0]).unwrap();
        prop_assert!(tr_out.max_abs_diff(&ComplexMatrix::identity(&[d])) < 1e-9);
    }

    #[test]
    fn unitary_channels_are_cp(seed: u64) {
        let u = haar_unitary_from(4, &mut rng(seed));
        let m = QuantumChannel::from_unitary(u).unwrap().choi();
        prop_assert!(is_cp(&m, 1e-10).unwrap().is_cp);
    }

    #[test]
    fn semicausal_does_not_signal_backwards(seed: u64, big_ancilla: bool) {
        let mut rng = rng(seed);
        let dc = if big_ancilla { 4 } else { 2 };
        let n = QuantumChannel::from_unitary(haar_unitary_from(2 * dc, &mut rng)).unwrap();
        let m = QuantumChannel::from_unitary(haar_unitary_from(2 * dc, &mut rng)).unwrap();
        let p = semicausal(&n, &m, &QuantumState::basis(dc, 0)).unwrap();
        let rho_a = QuantumState::random_mixed(2, &mut rng);
        let out = |rho_b: QuantumState| {
            let joint = rho_a.kron(&rho_b).with_factors(&[2, 2]).unwrap();
            p.apply(&joint).unwrap().reduce(&[0]).unwrap()
        };
        let first = out(QuantumState::random_mixed(2, &mut rng));
        let second = out(QuantumState::haar_pure(2, &mut rng));
        prop_assert!(first.matrix().max_abs_diff(second.matrix()) < 1e-9);
    }

    #[test]
    fn pdms_are_hermitian_with_unit_trace(seed: u64, n in 1usize..=2) {
        let mut rng = rng(seed);
        let d = 1 << n;
        let r = pdm_closed_form(
            &QuantumState::random_mixed(d, &mut rng),
            &random_channel(d, 2, &mut rng),
            &Layout::single(n),
        )
        .unwrap();
        prop_assert!(r.matrix().hermiticity_defect() < 1e-14);
        prop_assert!((r.matrix().trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(r.negativity() >= -1e-12);
        // revalidation accepts it, marginals included
        prop_assert!(Pdm::new(r.matrix().clone(), r.slots().to_vec()).is_ok());
    }

    #[test]
    fn time_reversal_preserves_negativity(seed: u64) {
        let mut rng = rng(seed);
        let r = pdm_closed_form(
            &QuantumState::random_mixed(2, &mut rng),
            &random_channel(2, 2, &mut rng),
            &Layout::single(1),
        )
        .unwrap();
        let rev = r.time_reverse().unwrap();
        prop_assert!((rev.negativity() - r.negativity()).abs() < 1e-12);
        prop_assert_eq!(rev.time_reverse().unwrap(), r);
    }

    #[test]
    fn product_input_through_semicausal_is_forward_cp(seed: u64) {
        let mut rng = rng(seed);
        let n = QuantumChannel::from_unitary(haar_unitary_from(4, &mut rng)).unwrap();
        let m = QuantumChannel::from_unitary(haar_unitary_from(4, &mut rng)).unwrap();
        let p = semicausal(&n, &m, &QuantumState::basis(2, 0)).unwrap();
        let input = QuantumState::random_mixed(2, &mut rng)
            .kron(&QuantumState::random_mixed(2, &mut rng))
            .with_factors(&[2, 2])
            .unwrap();
        let r = pdm_closed_form(&input, &p, &Layout::bipartite(1, 1))
            .unwrap()
            .reduce_labels(&[("t1", "A"), ("t2", "B")])
            .unwrap();
        let ex = extract_choi(&r).unwrap();
        prop_assert!(ex.min_eig_mt >= -1e-8, "min eig {}", ex.min_eig_mt);
        let v = classify(&r, &Thresholds::default()).unwrap();
        prop_assert!(
            v.contains(pdm_causal::inference::CausalStructure::AToB)
                || v.contains(pdm_causal::inference::CausalStructure::CommonCause)
        );
    }

    #[test]
    fn sdp_iterates_stay_feasible(seed: u64) {
        let mut rng = rng(seed);
        // pure input makes the forward family non-trivial
        let rho = QuantumState::haar_pure(2, &mut rng);
        let ch = random_channel(2, 2, &mut rng);
        let r = pdm_closed_form(&rho, &ch, &Layout::single(1)).unwrap();
        let cfg = pdm_causal::inference::SdpConfig { max_iterations: 25, ..Default::default() };
        for out in [
            pdm_causal::inference::sdp_least_negative_with(&r, Direction::Forward, &cfg).unwrap(),
            sdp_least_negative(&r, Direction::Forward).unwrap(),
        ] {
            let m = &out.extraction.m;
            prop_assert!(out.extraction.residual < 1e-7);
            prop_assert!(m.hermiticity_defect() < 1e-7);
            let tr = m.partial_trace(&[0]).unwrap();
            prop_assert!(tr.max_abs_diff(&ComplexMatrix::identity(&[2])) < 1e-7);
        }
        // the true channel is feasible and CP, so the optimum is zero
        let out = sdp_least_negative(&r, Direction::Forward).unwrap();
        prop_assert!(out.objective < 1e-6, "objective {}", out.objective);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn verdict_invariant_under_local_unitaries(seed: u64, kind in 0usize..3) {
        let mut rng = rng(seed);
        let r = match kind {
            0 => pdm_closed_form(
                &QuantumState::random_mixed(2, &mut rng),
                &random_channel(2, 2, &mut rng),
                &Layout::single(1),
            )
            .unwrap(),
            1 => {
                let p = semicausal(
                    &QuantumChannel::swap(2),
                    &QuantumChannel::from_unitary(haar_unitary_from(4, &mut rng)).unwrap(),
                    &QuantumState::basis(2, 0),
                )
                .unwrap();
                let input = QuantumState::random_mixed(4, &mut rng).with_factors(&[2, 2]).unwrap();
                pdm_closed_form(&input, &p, &Layout::bipartite(1, 1))
                    .unwrap()
                    .reduce_labels(&[("t1", "A"), ("t2", "B")])
                    .unwrap()
            }
            _ => Pdm::from_factors(
                QuantumState::random_mixed(4, &mut rng).into_matrix().with_factors(&[2, 2]).unwrap(),
            )
            .unwrap(),
        };
        let u = haar_unitary_from(2, &mut rng).kron(&haar_unitary_from(2, &mut rng));
        let rotated = Pdm::new(&(&u * r.matrix()) * &u.adjoint(), r.slots().to_vec()).unwrap();
        let th = Thresholds::default();
        let (a, b) = (classify(&r, &th).unwrap(), classify(&rotated, &th).unwrap());
        prop_assert_eq!(&a.compatible, &b.compatible);
        prop_assert!((a.f - b.f).abs() < 1e-10);
        prop_assert!((a.min_eig_forward - b.min_eig_forward).abs() < 1e-8);
        prop_assert!((a.min_eig_reverse - b.min_eig_reverse).abs() < 1e-8);
    }
}
