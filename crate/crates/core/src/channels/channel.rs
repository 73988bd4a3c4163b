use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::QuantumState;
use crate::error::{Error, Result};
use crate::tensor::{eig_hermitian, swap_operator, ComplexMatrix, I, ONE, ZERO};

/// Tolerance on trace preservation and unitarity.
pub const CHANNEL_TOL: f64 = 1e-9;

/// Kraus eigenvalues of the Choi matrix below this are dropped.
pub const KRAUS_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelRep {
    Kraus(Vec<ComplexMatrix>),
    Unitary(ComplexMatrix),
    /// Choi matrix in the input-transposed convention
    /// `M = sum_ij |j><i| (x) E(|i><j|)`, input factor first.
    Choi(ComplexMatrix),
}

/// A completely positive trace-preserving map.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    rep: ChannelRep,
    dim_in: usize,
    dim_out: usize,
}

impl QuantumChannel {
    pub fn from_kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let d = match ops.first() {
            Some(k) => k.dim(),
            None => return Err(Error::InvalidChannel("empty Kraus list".into())),
        };
        if ops.iter().any(|k| k.dim() != d) {
            return Err(Error::InvalidChannel("Kraus operators differ in dimension".into()));
        }
        let mut sum = ComplexMatrix::zeros(&[d]);
        for k in &ops {
            sum = &sum + &(&k.adjoint() * k);
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(&[d]));
        if defect > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(QuantumChannel {
            rep: ChannelRep::Kraus(ops),
            dim_in: d,
            dim_out: d,
        })
    }

    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        let d = u.dim();
        let defect = (&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(&[d]));
        if defect > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(QuantumChannel {
            rep: ChannelRep::Unitary(u),
            dim_in: d,
            dim_out: d,
        })
    }

    /// Wraps a Choi matrix in the input-transposed convention. Only
    /// Hermiticity and `Tr_out M = I` are checked; complete positivity is
    /// left to [`is_cp`](super::is_cp).
    pub fn from_choi(m: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if m.dim() != dim_in * dim_out {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix of dim {} for a {dim_in} -> {dim_out} channel",
                m.dim()
            )));
        }
        let m = m.with_factors(&[dim_in, dim_out])?;
        if !m.is_hermitian(1e-9) {
            return Err(Error::InvalidChannel("Choi matrix is not Hermitian".into()));
        }
        let defect = m
            .partial_trace(&[0])?
            .max_abs_diff(&ComplexMatrix::identity(&[dim_in]));
        if defect > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(QuantumChannel {
            rep: ChannelRep::Choi(m.hermitian_part()),
            dim_in,
            dim_out,
        })
    }

    /// Builds the channel whose action on operators is `map`, by sampling
    /// it on the matrix units.
    pub fn from_linear_map(
        dim_in: usize,
        dim_out: usize,
        map: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        Self::from_choi(choi_from_map(dim_in, dim_out, map)?, dim_in, dim_out)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_unitary(ComplexMatrix::identity(&[d])).expect("identity is unitary")
    }

    /// Unitary swap of two `d`-dimensional systems.
    pub fn swap(d: usize) -> Self {
        Self::from_unitary(swap_operator(d)).expect("swap is unitary")
    }

    /// Measures a qubit in the computational basis and re-prepares the
    /// outcome: `rho -> <0|rho|0> |0><0| + <1|rho|1> |1><1|`.
    pub fn measure_prepare_z() -> Self {
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]);
        Self::from_kraus(vec![p0, p1]).expect("projective measurement")
    }

    /// `exp(i theta S) = cos(theta) I + i sin(theta) S` on two qubits.
    pub fn partial_swap(theta: f64) -> Self {
        Self::from_unitary(partial_swap_unitary(theta)).expect("partial swap is unitary")
    }

    /// `rho -> Tr(rho) I/d`.
    pub fn depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let mut ops = Vec::with_capacity(d * d);
        for a in 0..d {
            for i in 0..d {
                let mut k = ComplexMatrix::zeros(&[d]);
                k[(a, i)] = Complex64::new(s, 0.0);
                ops.push(k);
            }
        }
        Self::from_kraus(ops).expect("depolarizing Kraus set")
    }

    /// Channel lookup by id: `identity`, `swap`, `measure_prepare_z`,
    /// `depolarizing`, or `partial_swap:<theta in radians>`.
    pub fn by_name(id: &str) -> Result<Self> {
        match id {
            "identity" => Ok(Self::identity(2)),
            "swap" => Ok(Self::swap(2)),
            "measure_prepare_z" => Ok(Self::measure_prepare_z()),
            "depolarizing" => Ok(Self::depolarizing(2)),
            _ => match id.strip_prefix("partial_swap:") {
                Some(theta) => theta
                    .trim()
                    .parse::<f64>()
                    .map(Self::partial_swap)
                    .map_err(|_| Error::UnknownChannel(id.to_string())),
                None => Err(Error::UnknownChannel(id.to_string())),
            },
        }
    }

    pub fn rep(&self) -> &ChannelRep {
        &self.rep
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Linear action on an arbitrary operator (not necessarily a state).
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "operator of dim {} into a channel with input dim {}",
                x.dim(),
                self.dim_in
            )));
        }
        let out = match &self.rep {
            ChannelRep::Unitary(u) => &(u * x) * &u.adjoint(),
            ChannelRep::Kraus(ops) => {
                let mut acc = ComplexMatrix::zeros(&[self.dim_out]);
                for k in ops {
                    acc = &acc + &(&(k * x) * &k.adjoint());
                }
                acc
            }
            ChannelRep::Choi(m) => {
                // E(X) = Tr_in[M (X (x) I)]
                let xi = x.clone().flattened().kron(&ComplexMatrix::identity(&[self.dim_out]));
                (m * &xi).partial_trace(&[1])?
            }
        };
        if self.dim_in == self.dim_out {
            out.with_factors(x.factors())
        } else {
            Ok(out)
        }
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        let out = self.apply_operator(state.matrix())?;
        QuantumState::new(out)
    }

    /// Choi matrix in the input-transposed convention, factors `[dim_in, dim_out]`.
    pub fn choi(&self) -> ComplexMatrix {
        match &self.rep {
            ChannelRep::Choi(m) => m.clone(),
            ChannelRep::Unitary(u) => choi_of_kraus(std::slice::from_ref(u)),
            ChannelRep::Kraus(ops) => choi_of_kraus(ops),
        }
    }

    /// Kraus operators of the channel; for a Choi representation these come
    /// from the eigendecomposition of the standard Choi matrix.
    pub fn kraus(&self) -> Result<Vec<ComplexMatrix>> {
        match &self.rep {
            ChannelRep::Kraus(ops) => Ok(ops.clone()),
            ChannelRep::Unitary(u) => Ok(vec![u.clone()]),
            ChannelRep::Choi(m) => {
                if self.dim_in != self.dim_out {
                    return Err(Error::InvalidChannel(
                        "Kraus form is only supported for square channels".into(),
                    ));
                }
                let dout = self.dim_out;
                let eig = eig_hermitian(&m.partial_transpose(0)?)?;
                if eig.min() < -CHANNEL_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "map is not completely positive (min eigenvalue {:.3e})",
                        eig.min()
                    )));
                }
                let mut ops = Vec::new();
                for (k, &mu) in eig.values.iter().enumerate() {
                    if mu < KRAUS_CUTOFF {
                        continue;
                    }
                    let s = mu.sqrt();
                    ops.push(ComplexMatrix::from_fn(&[dout], |a, i| {
                        eig.vectors[(i * dout + a, k)] * s
                    }));
                }
                Ok(ops)
            }
        }
    }

    /// `next` after `self`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim_out != next.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {} -> {} with {} -> {}",
                self.dim_in, self.dim_out, next.dim_in, next.dim_out
            )));
        }
        if let (ChannelRep::Unitary(a), ChannelRep::Unitary(b)) = (&self.rep, &next.rep) {
            return Self::from_unitary(b * a);
        }
        Self::from_linear_map(self.dim_in, next.dim_out, |x| {
            next.apply_operator(&self.apply_operator(x)?)
        })
    }
}

pub fn partial_swap_unitary(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    let id = ComplexMatrix::identity(&[2, 2]);
    &id.scale(c) + &swap_operator(2).scale_complex(I * s)
}

/// `sum_ij |j><i| (x) E(|i><j|)` for `E(X) = sum_k K X K^dagger`.
fn choi_of_kraus(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let din = ops[0].dim();
    let dout = din;
    // M[(j,a),(i,b)] = sum_k K[a,i] conj(K[b,j])
    let mut m = ComplexMatrix::zeros(&[din, dout]);
    for k in ops {
        for j in 0..din {
            for a in 0..dout {
                for i in 0..din {
                    let kai = k[(a, i)];
                    if kai == ZERO {
                        continue;
                    }
                    for b in 0..dout {
                        m[(j * dout + a, i * dout + b)] += kai * k[(b, j)].conj();
                    }
                }
            }
        }
    }
    m
}

fn choi_from_map(
    dim_in: usize,
    dim_out: usize,
    map: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(&[dim_in, dim_out]);
    for i in 0..dim_in {
        for j in 0..dim_in {
            let mut unit = ComplexMatrix::zeros(&[dim_in]);
            unit[(i, j)] = ONE;
            let out = map(&unit)?;
            if out.dim() != dim_out {
                return Err(Error::DimensionMismatch(format!(
                    "map produced dim {} instead of {dim_out}",
                    out.dim()
                )));
            }
            for a in 0..dim_out {
                for b in 0..dim_out {
                    m[(j * dim_out + a, i * dim_out + b)] = out[(a, b)];
                }
            }
        }
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RepTag {
    Kraus,
    Unitary,
    Choi,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    rep: RepTag,
    dim_in: usize,
    dim_out: usize,
    matrices: Vec<ComplexMatrix>,
}

impl Serialize for QuantumChannel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (rep, matrices) = match &self.rep {
            ChannelRep::Kraus(ops) => (RepTag::Kraus, ops.clone()),
            ChannelRep::Unitary(u) => (RepTag::Unitary, vec![u.clone()]),
            ChannelRep::Choi(m) => (RepTag::Choi, vec![m.clone()]),
        };
        ChannelJson {
            rep,
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            matrices,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumChannel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ChannelJson::deserialize(d)?;
        let single = |mut v: Vec<ComplexMatrix>| -> std::result::Result<ComplexMatrix, D::Error> {
            if v.len() != 1 {
                return Err(D::Error::custom("expected exactly one matrix"));
            }
            Ok(v.remove(0))
        };
        let ch = match raw.rep {
            RepTag::Kraus => QuantumChannel::from_kraus(raw.matrices),
            RepTag::Unitary => QuantumChannel::from_unitary(single(raw.matrices)?),
            RepTag::Choi => QuantumChannel::from_choi(single(raw.matrices)?, raw.dim_in, raw.dim_out),
        }
        .map_err(D::Error::custom)?;
        if ch.dim_in != raw.dim_in || ch.dim_out != raw.dim_out {
            return Err(D::Error::custom("declared dimensions do not match the matrices"));
        }
        Ok(ch)
    }
}
