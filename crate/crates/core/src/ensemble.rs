//! Monte Carlo model of an inhomogeneously broadened qubit ensemble under
//! repeated decoupling, with a homogeneous T2 decay on top.
//!
//! The efficiency proxy for a storage time `t` is
//! `|<c>(t)|² / |<c>(0)|² · exp(-2t/T2)`, where `<c>` is the ensemble mean of
//! the single-qubit coherence `ψ0* ψ1`.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd_model::{compose_phased, IntegratedCycle};
use crate::error::{Error, Result};
use crate::pulse::{free_propagator, DriveConfig, IntegratorConfig, PulseShape};
use crate::sequences::PhaseSequence;
use crate::su2::{expi, make_propagator, PulseParams, Unitary2};

/// Number of equally spaced initial phases used for [`InitialPhase::Uniform`].
/// The squared mean coherence only contains harmonics up to `e^{±2iθ}`, so
/// eight points reproduce the continuous average exactly.
const PHASE_SAMPLES: usize = 8;

/// Relative phase between the initial coherence and the drive frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialPhase {
    /// Every qubit starts in `(|0> + e^{iθ}|1>)/√2` with this θ.
    Fixed(f64),
    /// Average the efficiency over θ uniform in [0, 2π).
    Averaged(PhaseAverage),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseAverage {
    #[serde(rename = "uniform")]
    Uniform,
}

impl Default for InitialPhase {
    fn default() -> Self {
        InitialPhase::Averaged(PhaseAverage::Uniform)
    }
}

impl InitialPhase {
    fn thetas(&self) -> Vec<f64> {
        match *self {
            InitialPhase::Fixed(theta) => vec![theta],
            InitialPhase::Averaged(PhaseAverage::Uniform) => (0..PHASE_SAMPLES)
                .map(|j| TAU * j as f64 / PHASE_SAMPLES as f64)
                .collect(),
        }
    }
}

fn default_rabi_spread() -> f64 {
    0.1
}

/// Distribution of the ensemble plus its homogeneous decay time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EnsembleSpec {
    pub n_qubits: usize,
    /// Standard deviation of the qubit offsets Δ, rad/s.
    pub detuning_sigma: f64,
    /// Relative standard deviation of the Rabi frequency, truncated at ±3σ.
    #[serde(default = "default_rabi_spread")]
    pub rabi_spread: f64,
    /// Mean relative Rabi-frequency error.
    #[serde(default)]
    pub rabi_offset: f64,
    /// Offset of the drive from the ensemble centre, rad/s.
    #[serde(default)]
    pub drive_detuning: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    pub seed: u64,
    #[serde(default)]
    pub initial_phase: InitialPhase,
}

impl EnsembleSpec {
    /// Gaussian detuning spread whose free-induction decay `e^{-σ²t²/2}`
    /// reaches 1/e at `t_deph`.
    pub fn sigma_from_dephasing_time(t_deph: f64) -> f64 {
        2f64.sqrt() / t_deph
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidConfig("nQubits must be at least 1".into()));
        }
        if self.t2.is_nan() || self.t2 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "T2 must be positive, got {}",
                self.t2
            )));
        }
        if !(self.detuning_sigma >= 0.0 && self.detuning_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "detuningSigma must be non-negative, got {}",
                self.detuning_sigma
            )));
        }
        if !(self.rabi_spread >= 0.0 && self.rabi_spread.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "rabiSpread must be non-negative, got {}",
                self.rabi_spread
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSample {
    /// Qubit offset Δ(k), rad/s.
    pub detuning: f64,
    /// Relative Rabi-frequency error.
    pub amplitude_error: f64,
}

fn qubit_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sample_qubit(spec: &EnsembleSpec, index: usize) -> QubitSample {
    let mut rng = qubit_rng(spec.seed, index);
    let z: f64 = rng.sample(StandardNormal);
    let mut w: f64 = rng.sample(StandardNormal);
    while w.abs() > 3.0 {
        w = rng.sample(StandardNormal);
    }
    QubitSample {
        detuning: spec.detuning_sigma * z,
        amplitude_error: spec.rabi_offset + spec.rabi_spread * w,
    }
}

/// Per-qubit `(Δ, ε_a)` draws. Qubit `k` uses its own ChaCha stream, so the
/// result does not depend on evaluation order.
pub fn sample_ensemble(spec: &EnsembleSpec) -> Vec<QubitSample> {
    (0..spec.n_qubits)
        .into_par_iter()
        .map(|k| sample_qubit(spec, k))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PulseModel {
    /// Time-ordered integration of the configured pulse shape.
    #[default]
    Integrated,
    /// Instantaneous perfect π pulses; the pulse duration becomes free evolution.
    Ideal,
}

/// Pulse and timing shared by every qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdProtocol {
    pub shape: PulseShape,
    /// Pulse separation τ, seconds.
    pub tau: f64,
    pub integrator: IntegratorConfig,
    pub pulse_model: PulseModel,
}

impl DdProtocol {
    pub fn new(shape: PulseShape, tau: f64) -> Self {
        DdProtocol {
            shape,
            tau,
            integrator: IntegratorConfig::default(),
            pulse_model: PulseModel::Integrated,
        }
    }

    pub fn cycle_time(&self) -> f64 {
        self.tau + self.shape.duration()
    }

    fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        self.integrator.validate()?;
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pulse separation must be non-negative, got {}",
                self.tau
            )));
        }
        Ok(())
    }

    /// Unshifted cycle propagator seen by one qubit.
    fn qubit_cycle(&self, spec: &EnsembleSpec, q: &QubitSample) -> Result<Unitary2> {
        match self.pulse_model {
            PulseModel::Integrated => {
                let drive = DriveConfig::new(self.shape)
                    .with_errors(q.detuning - spec.drive_detuning, q.amplitude_error);
                let cycle = IntegratedCycle {
                    drive,
                    tau: self.tau,
                    free_detuning: q.detuning,
                    integrator: self.integrator,
                };
                cycle.base_propagator()
            }
            PulseModel::Ideal => {
                let half = free_propagator(q.detuning, self.cycle_time() / 2.0);
                // Same frame as a resonant rectangular π pulse at phase 0.
                let pi = make_propagator(&PulseParams {
                    p: 1.0,
                    alpha: 0.0,
                    beta: -PI / 2.0,
                })?;
                Ok(half * pi * half)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageResult {
    pub storage_time: f64,
    /// Highest proxy among the compared sequences.
    pub efficiency_proxy: f64,
    pub per_sequence: Vec<(String, f64)>,
}

impl StorageResult {
    pub fn proxy(&self, name: &str) -> Option<f64> {
        self.per_sequence
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

/// Number of complete sequence repetitions that fit into `storage_time`.
pub fn repetitions_for(
    protocol: &DdProtocol,
    sequence: &PhaseSequence,
    storage_time: f64,
) -> Result<usize> {
    let sequence_time = sequence.n() as f64 * protocol.cycle_time();
    // tolerate round-off when the storage time is an exact multiple
    let reps = (storage_time / sequence_time * (1.0 + 1e-12)).floor();
    if reps.is_nan() || reps < 1.0 {
        return Err(Error::StorageTooShort {
            storage_time,
            sequence_time,
        });
    }
    Ok(reps as usize)
}

fn initial_states(phase: &InitialPhase) -> Vec<[Complex64; 2]> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    phase
        .thetas()
        .into_iter()
        .map(|theta| [Complex64::new(r, 0.0), expi(theta) * r])
        .collect()
}

fn coherence(psi: &[Complex64; 2]) -> Complex64 {
    psi[0].conj() * psi[1]
}

/// Order-stable mean of per-qubit coherences for each initial state, then
/// the averaged squared modulus normalised by the initial value 1/4.
fn normalised_power(per_qubit: &[Vec<Complex64>], n_states: usize) -> f64 {
    let n = per_qubit.len() as f64;
    let mut power = 0.0;
    for j in 0..n_states {
        let mut sum = Complex64::new(0.0, 0.0);
        for q in per_qubit {
            sum += q[j];
        }
        power += (sum / n).norm_sqr();
    }
    power / n_states as f64 / 0.25
}

/// Storage-efficiency proxy of each sequence at each storage time.
///
/// Every qubit starts with a coherence, runs as many complete repetitions of
/// the sequence as fit into the storage time, and is read out at the end of
/// the last repetition. The `exp(-2t/T2)` factor uses the nominal storage time.
pub fn storage_curves(
    spec: &EnsembleSpec,
    protocol: &DdProtocol,
    sequences: &[PhaseSequence],
    times: &[f64],
) -> Result<Vec<StorageResult>> {
    spec.validate()?;
    protocol.validate()?;
    let reps: Vec<Vec<usize>> = times
        .iter()
        .map(|&t| {
            sequences
                .iter()
                .map(|s| repetitions_for(protocol, s, t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let samples = sample_ensemble(spec);
    let cycles = samples
        .par_iter()
        .map(|q| protocol.qubit_cycle(spec, q))
        .collect::<Result<Vec<_>>>()?;
    let states = initial_states(&spec.initial_phase);

    let mut table = vec![Vec::with_capacity(sequences.len()); times.len()];
    for (s_idx, seq) in sequences.iter().enumerate() {
        let phases = seq.phases_radians();
        let passes: Vec<Unitary2> = cycles
            .par_iter()
            .map(|c| compose_phased(c, &phases))
            .collect();
        for (t_idx, &t) in times.iter().enumerate() {
            let n_rep = reps[t_idx][s_idx];
            let per_qubit: Vec<Vec<Complex64>> = passes
                .par_iter()
                .map(|u| {
                    let total = u.pow(n_rep);
                    states
                        .iter()
                        .map(|psi| coherence(&total.apply(*psi)))
                        .collect()
                })
                .collect();
            let proxy = normalised_power(&per_qubit, states.len()) * (-2.0 * t / spec.t2).exp();
            table[t_idx].push((seq.name.clone(), proxy.clamp(0.0, 1.0)));
        }
    }

    Ok(times
        .iter()
        .zip(table)
        .map(|(&t, per_sequence)| StorageResult {
            storage_time: t,
            efficiency_proxy: per_sequence.iter().map(|&(_, v)| v).fold(0.0, f64::max),
            per_sequence,
        })
        .collect())
}

/// [`storage_curves`] for a single storage time.
pub fn storage_efficiency(
    spec: &EnsembleSpec,
    protocol: &DdProtocol,
    sequences: &[PhaseSequence],
    storage_time: f64,
) -> Result<StorageResult> {
    Ok(storage_curves(spec, protocol, sequences, &[storage_time])?.remove(0))
}

/// Proxy with no pulses at all: free-induction decay of the ensemble.
pub fn free_induction_decay(spec: &EnsembleSpec, storage_time: f64) -> Result<f64> {
    spec.validate()?;
    let samples = sample_ensemble(spec);
    let phases: Vec<Complex64> = samples
        .par_iter()
        .map(|q| expi(q.detuning * storage_time))
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for z in &phases {
        sum += z;
    }
    let n = samples.len() as f64;
    Ok(((sum / n).norm_sqr() * (-2.0 * storage_time / spec.t2).exp()).clamp(0.0, 1.0))
}

pub const STORAGE_CSV_HEADER: &str = "storage_time_s,sequence,efficiency_proxy";

/// CSV rows `storage_time_s,sequence,efficiency_proxy`, time-major.
pub fn write_storage_csv<W: Write>(out: &mut W, results: &[StorageResult]) -> io::Result<()> {
    writeln!(out, "{STORAGE_CSV_HEADER}")?;
    for r in results {
        for (name, v) in &r.per_sequence {
            writeln!(
                out,
                "{},{},{}",
                crate::format_float(r.storage_time),
                name,
                crate::format_float(*v)
            )?;
        }
    }
    Ok(())
}
