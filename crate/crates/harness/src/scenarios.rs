//! Worked examples and Monte-Carlo sweeps. Every runner checks its own
//! expected outcome and returns [`HarnessError::Check`] when it fails.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pdm_causal::channels::{
    haar_unitary_from, partial_swap_unitary, semicausal, QuantumChannel, QuantumState,
};
use pdm_causal::inference::{classify, CausalStructure, CausalVerdict, Thresholds};
use pdm_causal::pdm::{pdm_closed_form, Layout, Pdm};
use pdm_causal::rng::{generator, sample_seed, STREAM_CHANNELS, STREAM_STATES};
use pdm_causal::tensor::ComplexMatrix;

use crate::{HarnessError, Result};

/// `f > SWEEP_EPS` counts as negativity in sweeps.
pub const SWEEP_EPS: f64 = 1e-6;
/// Minimum fraction of negative samples a sweep must reach.
pub const SWEEP_MIN_FRACTION: f64 = 0.99;
pub const SWEEP_MIN_SAMPLES: usize = 100;
/// Entrywise tolerance against the closed-form reference matrices.
pub const MATRIX_TOL: f64 = 1e-10;
pub const SWAP_LAW_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub lambdas: Vec<f64>,
    /// Angles in radians.
    pub thetas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl ScenarioConfig {
    /// Defaults: lambda in 0.1..=0.9 step 0.1, theta in 0..=90 degrees step
    /// 5, 1000 samples, seed 7.
    pub fn new(scenario: &str) -> Self {
        ScenarioConfig {
            scenario: scenario.to_string(),
            lambdas: (1..=9).map(|k| k as f64 / 10.0).collect(),
            thetas: (0..=18).map(|k| (5.0 * k as f64).to_radians()).collect(),
            samples: 1000,
            seed: 7,
            thresholds: Thresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.thetas.is_empty() {
            return Err(HarnessError::Input("parameter grids must be nonempty".into()));
        }
        if self.samples == 0 {
            return Err(HarnessError::Input("sample count must be at least 1".into()));
        }
        Ok(())
    }
}

fn two_qubit(state: QuantumState) -> QuantumState {
    state.with_factors(&[2, 2]).expect("dimension 4")
}

/// `R_{A1B2}` for a bipartite input through a two-qubit channel.
fn cross_pdm(input: &QuantumState, channel: &QuantumChannel) -> Result<Pdm> {
    Ok(pdm_closed_form(input, channel, &Layout::bipartite(1, 1))?
        .reduce_labels(&[("t1", "A"), ("t2", "B")])?)
}

/// `A` swapped into a `|0>` ancilla, then `m_bc` on `B` and the ancilla.
fn swap_then(m_bc: &QuantumChannel) -> Result<QuantumChannel> {
    Ok(semicausal(&QuantumChannel::swap(2), m_bc, &QuantumState::basis(2, 0))?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub parameter: f64,
    pub f: f64,
    pub min_eig_forward: f64,
    pub min_eig_reverse: f64,
    pub compatible: Vec<u8>,
    /// Largest entrywise deviation from the reference matrix, where one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
}

/// Flat form of [`VerdictRow`] for CSV, with `compatible` joined by `;`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictCsvRow {
    pub parameter: f64,
    pub f: f64,
    pub min_eig_forward: f64,
    pub min_eig_reverse: f64,
    pub compatible: String,
    pub deviation: Option<f64>,
}

impl From<&VerdictRow> for VerdictCsvRow {
    fn from(r: &VerdictRow) -> Self {
        VerdictCsvRow {
            parameter: r.parameter,
            f: r.f,
            min_eig_forward: r.min_eig_forward,
            min_eig_reverse: r.min_eig_reverse,
            compatible: r.compatible.iter().map(u8::to_string).collect::<Vec<_>>().join(";"),
            deviation: r.deviation,
        }
    }
}

impl VerdictRow {
    fn new(parameter: f64, v: &CausalVerdict, deviation: Option<f64>) -> Self {
        VerdictRow {
            parameter,
            f: v.f,
            min_eig_forward: v.min_eig_forward,
            min_eig_reverse: v.min_eig_reverse,
            compatible: v.numbers(),
            deviation,
        }
    }
}

/// Input `[(1 - lambda) I/2 + lambda |+><+|]` on `A`, measured in `Z` and
/// re-prepared on `B`. Expects verdict `{1}` for every lambda in (0, 1).
pub fn run_measure_prepare(cfg: &ScenarioConfig) -> Result<Vec<VerdictRow>> {
    cfg.validate()?;
    if let Some(l) = cfg.lambdas.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(HarnessError::Input(format!("lambda {l} is outside (0, 1)")));
    }
    let ch = QuantumChannel::measure_prepare_z();
    cfg.lambdas
        .iter()
        .map(|&lambda| {
            let mixed = ComplexMatrix::identity(&[2]).scale((1.0 - lambda) / 2.0);
            let rho = QuantumState::new(&mixed + &QuantumState::plus().into_matrix().scale(lambda))?;
            let r = pdm_closed_form(&rho, &ch, &Layout::single(1))?;
            let v = classify(&r, &cfg.thresholds)?;
            if v.compatible != [CausalStructure::AToB] || v.min_eig_reverse >= 0.0 {
                return Err(HarnessError::Check(format!(
                    "measure-prepare lambda={lambda}: verdict {:?}, reverse min eig {:.3e}",
                    v.numbers(),
                    v.min_eig_reverse
                )));
            }
            Ok(VerdictRow::new(lambda, &v, None))
        })
        .collect()
}

/// Bell input on `A1 B1`; `A` is swapped into the ancilla, which then meets
/// `B` through `exp(i theta S)`. Checks `R_{A1B2}` against its closed form
/// and expects `{4, 5}` (or `{3}` at `sin theta = 0`, where `R` is positive).
pub fn run_common_cause_mixture(cfg: &ScenarioConfig) -> Result<Vec<VerdictRow>> {
    cfg.validate()?;
    if let Some(t) = cfg.thetas.iter().find(|t| (t.sin().abs() - 1.0).abs() < 1e-12) {
        return Err(HarnessError::Input(format!("theta {t} has |sin theta| = 1, which is excluded")));
    }
    cfg.thetas
        .iter()
        .map(|&theta| {
            let r = cross_pdm(&QuantumState::bell(), &swap_then(&QuantumChannel::partial_swap(theta))?)?;
            let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
            let expect = ComplexMatrix::from_real_rows(&[
                vec![0.5, 0.0, 0.0, c2 / 2.0],
                vec![0.0, 0.0, s2 / 2.0, 0.0],
                vec![0.0, s2 / 2.0, 0.0, 0.0],
                vec![c2 / 2.0, 0.0, 0.0, 0.5],
            ]);
            let deviation = r.matrix().clone().flattened().max_abs_diff(&expect);
            if deviation > MATRIX_TOL {
                return Err(HarnessError::Check(format!(
                    "common cause theta={theta}: R_A1B2 deviates by {deviation:.3e}"
                )));
            }
            let v = classify(&r, &cfg.thresholds)?;
            let want: Vec<u8> = if v.f <= cfg.thresholds.eps_neg { vec![3] } else { vec![4, 5] };
            if v.numbers() != want {
                return Err(HarnessError::Check(format!(
                    "common cause theta={theta}: verdict {:?}, expected {want:?}",
                    v.numbers()
                )));
            }
            Ok(VerdictRow::new(theta, &v, Some(deviation)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapInfluenceRow {
    pub theta: f64,
    pub f: f64,
    pub expected: f64,
    pub deviation: f64,
}

/// `|00>` through `exp(i theta S)`; the single-party PDM `R_{A1A2}` must
/// have `f = |cos theta|`.
pub fn run_swap_influence(cfg: &ScenarioConfig) -> Result<Vec<SwapInfluenceRow>> {
    cfg.validate()?;
    cfg.thetas
        .iter()
        .map(|&theta| {
            let r = pdm_closed_form(
                &two_qubit(QuantumState::basis(4, 0)),
                &QuantumChannel::partial_swap(theta),
                &Layout::bipartite(1, 1),
            )?
            .reduce_labels(&[("t1", "A"), ("t2", "A")])?;
            let f = r.negativity();
            let expected = theta.cos().abs();
            let deviation = (f - expected).abs();
            if deviation > SWAP_LAW_TOL {
                return Err(HarnessError::Check(format!(
                    "swap influence theta={theta}: f={f}, expected {expected}"
                )));
            }
            Ok(SwapInfluenceRow {
                theta,
                f,
                expected,
                deviation,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    /// Fixed inputs `|00>` and Bell, Haar-random `M_BC`.
    Fig3,
    /// Fixed `M_BC = exp(-i theta S)` at 30 and 60 degrees, Haar-random
    /// pure two-qubit inputs.
    Fig4,
}

impl std::str::FromStr for Sweep {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Sweep::Fig3),
            "fig4" => Ok(Sweep::Fig4),
            _ => Err(HarnessError::Input(format!("unknown sweep `{s}` (fig3 or fig4)"))),
        }
    }
}

/// One sample of a sweep. For fig3 `input_id` 0 is `|00>` and 1 the Bell
/// state; for fig4 it indexes the angle (0: 30 degrees, 1: 60 degrees).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sample_id: usize,
    pub input_id: usize,
    pub f: f64,
    pub min_eig_fwd: f64,
    pub min_eig_rev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub scenario: Sweep,
    pub samples: usize,
    pub seed: u64,
    pub eps: f64,
    /// Fraction of samples with `f > eps`, per `input_id`.
    pub fractions: Vec<f64>,
}

pub const FIG4_DEGREES: [f64; 2] = [30.0, 60.0];

fn sweep_row(sample_id: usize, input_id: usize, input: &QuantumState, m_bc: &QuantumChannel, th: &Thresholds) -> Result<SweepRow> {
    let r = cross_pdm(input, &swap_then(m_bc)?)?;
    let v = classify(&r, th)?;
    Ok(SweepRow {
        sample_id,
        input_id,
        f: v.f,
        min_eig_fwd: v.min_eig_forward,
        min_eig_rev: v.min_eig_reverse,
    })
}

/// Monte-Carlo sweep; rows are ordered by `(sample_id, input_id)` and are
/// a deterministic function of the configuration.
pub fn run_haar_sweep(sweep: Sweep, cfg: &ScenarioConfig) -> Result<(Vec<SweepRow>, SweepSummary)> {
    cfg.validate()?;
    if cfg.samples < SWEEP_MIN_SAMPLES {
        return Err(HarnessError::Input(format!(
            "sweeps need at least {SWEEP_MIN_SAMPLES} samples, got {}",
            cfg.samples
        )));
    }
    let th = &cfg.thresholds;
    let per_sample: Vec<Vec<SweepRow>> = match sweep {
        Sweep::Fig3 => {
            let inputs = [two_qubit(QuantumState::basis(4, 0)), QuantumState::bell()];
            (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = generator(sample_seed(cfg.seed, i as u64), STREAM_CHANNELS);
                    let m = QuantumChannel::from_unitary(haar_unitary_from(4, &mut rng))?;
                    inputs
                        .iter()
                        .enumerate()
                        .map(|(k, input)| sweep_row(i, k, input, &m, th))
                        .collect()
                })
                .collect::<Result<_>>()?
        }
        Sweep::Fig4 => {
            let channels = FIG4_DEGREES
                .iter()
                .map(|d| Ok(QuantumChannel::from_unitary(partial_swap_unitary(-d.to_radians()))?))
                .collect::<Result<Vec<_>>>()?;
            (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = generator(sample_seed(cfg.seed, i as u64), STREAM_STATES);
                    let input = two_qubit(QuantumState::haar_pure(4, &mut rng));
                    channels
                        .iter()
                        .enumerate()
                        .map(|(k, m)| sweep_row(i, k, &input, m, th))
                        .collect()
                })
                .collect::<Result<_>>()?
        }
    };
    let rows: Vec<SweepRow> = per_sample.into_iter().flatten().collect();
    let fractions = (0..2)
        .map(|k| {
            let neg = rows.iter().filter(|r| r.input_id == k && r.f > SWEEP_EPS).count();
            neg as f64 / cfg.samples as f64
        })
        .collect();
    let summary = SweepSummary {
        scenario: sweep,
        samples: cfg.samples,
        seed: cfg.seed,
        eps: SWEEP_EPS,
        fractions,
    };
    if let Some(f) = summary.fractions.iter().find(|&&f| f < SWEEP_MIN_FRACTION) {
        return Err(HarnessError::Check(format!(
            "only {f:.3} of samples show negativity (need {SWEEP_MIN_FRACTION})"
        )));
    }
    Ok((rows, summary))
}
