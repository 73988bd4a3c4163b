//! Quantum states, channels and their Choi matrices.
//!
//! Choi matrices use the input-transposed convention
//! `M = sum_ij |i><j|^T (x) E(|i><j|)`, input factor first. With it,
//! `Tr_out M = I` for trace-preserving maps, `E(X) = Tr_in[M (X (x) I)]`, and
//! complete positivity is positivity of `M` after transposing the input
//! factor ([`input_transpose`]).

mod channel;
mod state;

pub use channel::{partial_swap_unitary, ChannelRep, QuantumChannel, CHANNEL_TOL, KRAUS_CUTOFF};
pub use state::{QuantumState, STATE_TOL};

use crate::error::{Error, Result};
use crate::rng::{generator, Rng, STREAM_DEFAULT};
use crate::tensor::{eig_hermitian, ComplexMatrix};

/// Partial transpose on the input (first) factor of a two-factor Choi matrix.
pub fn input_transpose(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.factors().len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a bipartite (input, output) matrix, got factors {:?}",
            m.factors()
        )));
    }
    m.partial_transpose(0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpCheck {
    pub is_cp: bool,
    /// Smallest eigenvalue of the input-transposed matrix.
    pub min_eigenvalue: f64,
}

/// Complete-positivity test for a Choi matrix in the input-transposed
/// convention.
pub fn is_cp(m: &ComplexMatrix, eps: f64) -> Result<CpCheck> {
    let min_eigenvalue = eig_hermitian(&input_transpose(m)?)?.min();
    Ok(CpCheck {
        is_cp: min_eigenvalue >= -eps,
        min_eigenvalue,
    })
}

/// The semicausal channel `P(rho_AB) = Tr_C[M_BC(N_AC(rho_AB (x) rho_C))]` on
/// `A (x) B`.
///
/// The ancilla dimension is `rho_c.dim()`; the dimensions of `A` and `B` are
/// inferred from the input dimensions of the two component channels. `P`
/// cannot signal from `B` to `A`.
pub fn semicausal(
    n_ac: &QuantumChannel,
    m_bc: &QuantumChannel,
    rho_c: &QuantumState,
) -> Result<QuantumChannel> {
    let dc = rho_c.dim();
    let split = |ch: &QuantumChannel, name: &str| -> Result<usize> {
        if ch.dim_in() != ch.dim_out() || !ch.dim_in().is_multiple_of(dc) {
            return Err(Error::DimensionMismatch(format!(
                "{name} ({} -> {}) does not act on a system times a {dc}-dim ancilla",
                ch.dim_in(),
                ch.dim_out()
            )));
        }
        Ok(ch.dim_in() / dc)
    };
    let da = split(n_ac, "N_AC")?;
    let db = split(m_bc, "M_BC")?;
    let joint = [da, db, dc];

    let n_ops = n_ac
        .kraus()?
        .into_iter()
        .map(|k| ComplexMatrix::embed(&k.with_factors(&[da, dc])?, &joint, &[0, 2]))
        .collect::<Result<Vec<_>>>()?;
    let m_ops = m_bc
        .kraus()?
        .into_iter()
        .map(|k| ComplexMatrix::embed(&k.with_factors(&[db, dc])?, &joint, &[1, 2]))
        .collect::<Result<Vec<_>>>()?;

    // purify rho_C as sum_r p_r |r><r|
    let eig = eig_hermitian(rho_c.matrix())?;
    let ancilla: Vec<(f64, Vec<_>)> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > KRAUS_CUTOFF)
        .map(|(k, &p)| (p.sqrt(), eig.vectors.column(k)))
        .collect();

    let mut ops = Vec::new();
    for m in &m_ops {
        for n in &n_ops {
            let w = m * n;
            for (amp, r) in &ancilla {
                for e in 0..dc {
                    // K[x, y] = sum_c W[(x, e), (y, c)] sqrt(p) r[c]
                    ops.push(ComplexMatrix::from_fn(&[da, db], |x, y| {
                        (0..dc)
                            .map(|c| w[(x * dc + e, y * dc + c)] * r[c])
                            .sum::<num_complex::Complex64>()
                            * *amp
                    }));
                }
            }
        }
    }
    QuantumChannel::from_kraus(ops)
}

/// Haar-random `d x d` unitary, deterministic in `seed` (stream 0).
pub fn haar_unitary(d: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_from(d, &mut generator(seed, STREAM_DEFAULT))
}

/// Haar-random unitary drawn from `rng`.
///
/// Gram-Schmidt QR of a complex Ginibre matrix. Gram-Schmidt produces a
/// triangular factor with positive real diagonal, which is the phase
/// normalization that makes `Q` Haar distributed.
pub fn haar_unitary_from(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = state::ginibre(d, rng);
    let mut cols: Vec<Vec<num_complex::Complex64>> = (0..d).map(|c| g.column(c)).collect();
    for k in 0..d {
        // two passes of modified Gram-Schmidt keep Q orthonormal to rounding
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let proj: num_complex::Complex64 =
                    done[j].iter().zip(&rest[0]).map(|(q, v)| q.conj() * v).sum();
                for (v, q) in rest[0].iter_mut().zip(&done[j]) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for v in cols[k].iter_mut() {
            *v /= norm;
        }
    }
    ComplexMatrix::from_fn(&[d], |r, c| cols[c][r])
}

/// Random channel on dimension `d` from a Haar-random Stinespring unitary
/// with an `env_dim`-dimensional environment prepared in `|0>`.
pub fn random_channel(d: usize, env_dim: usize, rng: &mut Rng) -> QuantumChannel {
    let u = haar_unitary_from(d * env_dim, rng);
    let ops = (0..env_dim)
        .map(|e| ComplexMatrix::from_fn(&[d], |x, y| u[(x * env_dim + e, y * env_dim)]))
        .collect();
    QuantumChannel::from_kraus(ops).expect("isometry columns give a complete Kraus set")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::generator;
    use crate::tensor::{sigma, swap_operator, PauliString, ONE};
    use num_complex::Complex64;
    use std::f64::consts::PI;


    #[test]
    fn identity_choi_is_swap() {
        let m = QuantumChannel::identity(2).choi();
        assert_eq!(m, swap_operator(2));
    }

    #[test]
    fn measure_prepare_choi() {
        let m = QuantumChannel::measure_prepare_z().choi();
        let expect = (&sigma(0).kron(&sigma(0)) + &sigma(3).kron(&sigma(3))).scale(0.5);
        assert!(m.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn depolarizing_choi() {
        let m = QuantumChannel::depolarizing(2).choi();
        assert!(m.max_abs_diff(&ComplexMatrix::identity(&[2, 2]).scale(0.5)) < 1e-15);
    }

    #[test]
    fn choi_matches_pauli_form() {
        // M = (1/2^n) sum_i sigma_i (x) E(sigma_i)
        let mut rng = generator(11, 0);
        for n in 1..=2 {
            let d = 1 << n;
            let ch = random_channel(d, 2, &mut rng);
            let mut acc = ComplexMatrix::zeros(&[d, d]);
            for p in PauliString::all(n) {
                let s = p.matrix();
                acc = &acc + &s.kron(&ch.apply_operator(&s).unwrap());
            }
            let acc = acc.scale(1.0 / d as f64);
            assert!(ch.choi().max_abs_diff(&acc) < 1e-10);
        }
    }

    #[test]
    fn representations_agree() {
        let mut rng = generator(12, 0);
        for d in [2, 4] {
            let ch = random_channel(d, 2, &mut rng);
            let kraus = QuantumChannel::from_kraus(ch.kraus().unwrap()).unwrap();
            let u = haar_unitary_from(d, &mut rng);
            let unitary = QuantumChannel::from_unitary(u.clone()).unwrap();
            let unitary_choi = QuantumChannel::from_choi(unitary.choi(), d, d).unwrap();
            for _ in 0..5 {
                let rho = QuantumState::random_mixed(d, &mut rng);
                let a = ch.apply(&rho).unwrap();
                let b = kraus.apply(&rho).unwrap();
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-10);
                let a = unitary.apply(&rho).unwrap();
                let b = unitary_choi.apply(&rho).unwrap();
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-10);
            }
            let tr_out = ch.choi().partial_trace(&[0]).unwrap();
            assert!(tr_out.max_abs_diff(&ComplexMatrix::identity(&[d])) < 1e-9);
        }
    }

    #[test]
    fn apply_examples() {
        let rho = QuantumState::plus();
        let out = QuantumChannel::identity(2).apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let mut rng = generator(13, 0);
        let rho = QuantumState::random_mixed(2, &mut rng);
        let out = QuantumChannel::measure_prepare_z().apply(&rho).unwrap();
        let expect = ComplexMatrix::diag_real(&[rho.matrix()[(0, 0)].re, rho.matrix()[(1, 1)].re]);
        assert!(out.matrix().max_abs_diff(&expect) < 1e-15);

        let zz = QuantumState::basis(4, 0);
        let out = QuantumChannel::partial_swap(0.7).apply(&zz).unwrap();
        assert!(out.matrix().max_abs_diff(zz.matrix()) < 1e-15);
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let rho = QuantumState::basis(4, 0);
        assert!(QuantumChannel::identity(2).apply(&rho).is_err());
    }

    #[test]
    fn input_transpose_examples() {
        let pt = input_transpose(&swap_operator(2)).unwrap();
        let e = eig_hermitian(&pt).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-14);
        assert!(e.values[1..].iter().all(|v| v.abs() < 1e-14));
        assert_eq!(input_transpose(&pt).unwrap(), swap_operator(2));

        let mp = QuantumChannel::measure_prepare_z().choi();
        assert_eq!(input_transpose(&mp).unwrap(), mp);

        let sym = sigma(1).kron(&sigma(2));
        assert_eq!(input_transpose(&sym).unwrap(), sym);
        assert!(input_transpose(&ComplexMatrix::identity(&[8])).is_err());
    }

    #[test]
    fn is_cp_examples() {
        assert!(is_cp(&QuantumChannel::identity(2).choi(), 1e-10).unwrap().is_cp);
        assert!(is_cp(&QuantumChannel::measure_prepare_z().choi(), 1e-10).unwrap().is_cp);
        // reverse of measure-prepare at lambda = 1/2, as a Choi matrix with
        // input factor first: |0><0| (x) A + |1><1| (x) B
        let lam = 0.5;
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, lam / 2.0], vec![lam / 2.0, 0.0]]);
        let b = ComplexMatrix::from_real_rows(&[vec![0.0, lam / 2.0], vec![lam / 2.0, 1.0]]);
        let mbar = &ComplexMatrix::diag_real(&[1.0, 0.0]).kron(&a)
            + &ComplexMatrix::diag_real(&[0.0, 1.0]).kron(&b);
        let check = is_cp(&mbar, 1e-10).unwrap();
        assert!(!check.is_cp);
        assert!((check.min_eigenvalue - (1.0 - (1.0f64 + lam * lam).sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_channels_are_cp() {
        let mut rng = generator(14, 0);
        for d in [2, 4] {
            let u = QuantumChannel::from_unitary(haar_unitary_from(d, &mut rng)).unwrap();
            assert!(is_cp(&u.choi(), 1e-10).unwrap().is_cp);
        }
    }

    #[test]
    fn partial_swap_forms() {
        assert_eq!(partial_swap_unitary(0.0), ComplexMatrix::identity(&[2, 2]));
        let u = partial_swap_unitary(PI / 2.0);
        assert!(u.max_abs_diff(&swap_operator(2).scale_complex(Complex64::new(0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn partial_swap_induced_kraus_pair() {
        let theta: f64 = 0.4;
        let (s, c) = theta.sin_cos();
        let u = partial_swap_unitary(theta);
        let env = QuantumState::basis(2, 0);
        let reduced = QuantumChannel::from_linear_map(2, 2, |x| {
            let big = x.clone().flattened().kron(env.matrix());
            (&(&u * &big) * &u.adjoint()).partial_trace(&[0])
        })
        .unwrap();
        let i = Complex64::new(0.0, 1.0);
        let mut k1 = ComplexMatrix::identity(&[2]).scale(c);
        k1[(0, 0)] += i * s;
        let mut k2 = ComplexMatrix::zeros(&[2]);
        k2[(0, 1)] = i * s;
        let expect = QuantumChannel::from_kraus(vec![k1, k2]).unwrap();
        assert!(reduced.choi().max_abs_diff(&expect.choi()) < 1e-14);
    }

    #[test]
    fn semicausal_swap_identity_replaces_a() {
        let rho_c = QuantumState::plus();
        let p = semicausal(&QuantumChannel::swap(2), &QuantumChannel::identity(4), &rho_c).unwrap();
        let mut rng = generator(15, 0);
        let rho_ab = QuantumState::random_mixed(4, &mut rng).with_factors(&[2, 2]).unwrap();
        let out = p.apply(&rho_ab).unwrap().with_factors(&[2, 2]).unwrap();
        let a_out = out.reduce(&[0]).unwrap();
        assert!(a_out.matrix().max_abs_diff(rho_c.matrix()) < 1e-12);
        let b_out = out.reduce(&[1]).unwrap();
        assert!(b_out.matrix().max_abs_diff(rho_ab.reduce(&[1]).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn semicausal_forbids_b_to_a_signalling() {
        let mut rng = generator(16, 0);
        for dc in [2, 4] {
            let n = QuantumChannel::from_unitary(haar_unitary_from(2 * dc, &mut rng)).unwrap();
            let m = QuantumChannel::from_unitary(haar_unitary_from(2 * dc, &mut rng)).unwrap();
            let p = semicausal(&n, &m, &QuantumState::basis(dc, 0)).unwrap();
            assert!(is_cp(&p.choi().with_factors(&[4, 4]).unwrap(), 1e-10).unwrap().is_cp);
            let rho_a = QuantumState::random_mixed(2, &mut rng);
            let mut reference: Option<ComplexMatrix> = None;
            for _ in 0..5 {
                let rho_b = QuantumState::random_mixed(2, &mut rng);
                let out = p.apply(&rho_a.kron(&rho_b)).unwrap();
                let a_out = out.matrix().clone().with_factors(&[2, 2]).unwrap().partial_trace(&[0]).unwrap();
                match &reference {
                    None => reference = Some(a_out),
                    Some(r) => assert!(r.max_abs_diff(&a_out) < 1e-9),
                }
            }
        }
    }

    #[test]
    fn semicausal_measure_prepare_dilation() {
        // A is copied into C by a CNOT, then C is swapped into B: the
        // effective A -> B map is measure-and-prepare in the Z basis.
        let mut cnot = ComplexMatrix::zeros(&[2, 2]);
        for (r, c) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            cnot[(r, c)] = ONE;
        }
        let n = QuantumChannel::from_unitary(cnot).unwrap();
        let p = semicausal(&n, &QuantumChannel::swap(2), &QuantumState::basis(2, 0)).unwrap();
        // effective A -> B map with B prepared in |0>
        let b0 = QuantumState::basis(2, 0);
        let effective = QuantumChannel::from_linear_map(2, 2, |x| {
            let out = p
                .apply_operator(&x.clone().flattened().kron(b0.matrix()))?
                .with_factors(&[2, 2])?;
            out.partial_trace(&[1])
        })
        .unwrap();
        let expect = QuantumChannel::measure_prepare_z().choi();
        assert!(effective.choi().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn haar_is_unitary_and_deterministic() {
        for d in [1, 2, 4, 8] {
            let u = haar_unitary(d, 5);
            let defect = (&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(&[d]));
            assert!(defect < 1e-12);
            assert_eq!(u, haar_unitary(d, 5));
        }
        assert!((haar_unitary(1, 9)[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert_ne!(haar_unitary(4, 1), haar_unitary(4, 2));
    }

    #[test]
    fn haar_first_moment() {
        // E|U_00|^2 = 1/d; Var = (d-1)/(d^2 (d+1)) for Haar
        let d = 4usize;
        let n = 10_000;
        let mut rng = generator(17, 0);
        let mean = (0..n)
            .map(|_| haar_unitary_from(d, &mut rng)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        let var = (d as f64 - 1.0) / ((d * d) as f64 * (d as f64 + 1.0));
        let sigma = (var / n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn by_name_lookup() {
        assert_eq!(QuantumChannel::by_name("identity").unwrap(), QuantumChannel::identity(2));
        let ps = QuantumChannel::by_name("partial_swap:0.3").unwrap();
        assert_eq!(ps, QuantumChannel::partial_swap(0.3));
        assert!(QuantumChannel::by_name("partial_swap:x").is_err());
        assert!(QuantumChannel::by_name("teleport").is_err());
    }

    #[test]
    fn channel_json_round_trip() {
        for ch in [
            QuantumChannel::measure_prepare_z(),
            QuantumChannel::partial_swap(0.2),
            QuantumChannel::from_choi(QuantumChannel::identity(2).choi(), 2, 2).unwrap(),
        ] {
            let s = serde_json::to_string(&ch).unwrap();
            assert!(s.contains("\"rep\""));
            let back: QuantumChannel = serde_json::from_str(&s).unwrap();
            assert!(back.choi().max_abs_diff(&ch.choi()) < 1e-12);
        }
        let bad = r#"{"rep":"unitary","dim_in":2,"dim_out":2,"matrices":[{"factors":[2],"re":[[1,1],[0,1]],"im":[[0,0],[0,0]]}]}"#;
        assert!(serde_json::from_str::<QuantumChannel>(bad).is_err());
    }
}
