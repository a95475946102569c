//! Cycle and sequence propagators for dynamical decoupling.
//!
//! One cycle is free evolution for `τ/2`, a phased pulse, then another `τ/2`
//! of free evolution. With the pulse written as `(p, α, β)` and
//! `δ = -Δ τ / 2`, the cycle is exactly `U(p, α + δ, β + φ)`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::pulse::{free_propagator, pulse_propagator, DriveConfig, IntegratorConfig};
use crate::sequences::{ur_phases, PhaseSequence, PiFraction, Sign};
use crate::su2::{
    extract_params, fidelity_unchecked, make_propagator, Fidelity, PulseParams, Unitary2,
};

/// Static description of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleParams {
    pub pulse: PulseParams,
    /// Free-evolution phase `-Δ τ / 2`.
    pub delta: f64,
}

impl CycleParams {
    pub fn new(p: f64, alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        Ok(CycleParams {
            pulse: PulseParams::new(p, alpha, beta)?,
            delta,
        })
    }
}

pub fn cycle_propagator_static(c: &CycleParams, phi: f64) -> Unitary2 {
    let PulseParams { p, alpha, beta } = c.pulse;
    // p was validated when the params were built.
    make_propagator(&PulseParams {
        p,
        alpha: alpha + c.delta,
        beta: beta + phi,
    })
    .expect("validated transition probability")
}

/// A physical cycle: finite pulse surrounded by two half-periods of free evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedCycle {
    pub drive: DriveConfig,
    /// Pulse separation τ, seconds.
    pub tau: f64,
    /// Qubit offset used during free evolution. Equal to the pulse detuning
    /// unless the drive itself is detuned.
    pub free_detuning: f64,
    pub integrator: IntegratorConfig,
}

impl IntegratedCycle {
    pub fn new(drive: DriveConfig, tau: f64) -> Self {
        IntegratedCycle {
            drive,
            tau,
            free_detuning: drive.static_detuning,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn with_integrator(mut self, integrator: IntegratorConfig) -> Self {
        self.integrator = integrator;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pulse separation must be non-negative, got {}",
                self.tau
            )));
        }
        Ok(())
    }

    /// Cycle propagator with the drive phase as configured (no extra shift).
    pub fn base_propagator(&self) -> Result<Unitary2> {
        self.validate()?;
        let half = free_propagator(self.free_detuning, self.tau / 2.0);
        let pulse = pulse_propagator(&self.drive, &self.integrator)?;
        Ok(half * pulse * half)
    }
}

/// `free(τ/2) · pulse(phase + phi) · free(τ/2)`, integrated directly.
pub fn cycle_propagator_integrated(
    drive: &DriveConfig,
    tau: f64,
    phi: f64,
    integrator: &IntegratorConfig,
) -> Result<Unitary2> {
    let shifted = drive.with_phase(drive.drive_phase + phi);
    IntegratedCycle::new(shifted, tau)
        .with_integrator(*integrator)
        .base_propagator()
}

/// Shift the drive phase of an already-built propagator: the Hamiltonian at
/// phase `φ` is `Rz(-φ) h Rz(φ)`, so the same holds for any propagator whose
/// free-evolution parts are diagonal.
#[inline]
pub fn shift_phase(u: &Unitary2, phi: f64) -> Unitary2 {
    Unitary2::rz(-phi) * *u * Unitary2::rz(phi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CycleModel {
    /// Identical `(p, α, β, δ)` for every cycle.
    Static(CycleParams),
    /// Time-ordered integration of a physical pulse.
    Integrated(IntegratedCycle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRun {
    pub sequence: PhaseSequence,
    pub repetitions: usize,
    pub model: CycleModel,
}

impl SequenceRun {
    pub fn new(sequence: PhaseSequence, repetitions: usize, model: CycleModel) -> Self {
        SequenceRun {
            sequence,
            repetitions,
            model,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.sequence.phases.is_empty() {
            return Err(Error::EmptyComposition);
        }
        Ok(())
    }
}

/// Compose one pass of `phases` given the unshifted cycle propagator.
pub fn compose_phased(base: &Unitary2, phases: &[f64]) -> Unitary2 {
    phases
        .iter()
        .fold(Unitary2::IDENTITY, |acc, &phi| shift_phase(base, phi) * acc)
}

/// Propagator of `N` repetitions of the sequence.
pub fn sequence_propagator(run: &SequenceRun) -> Result<Unitary2> {
    run.validate()?;
    let phases = run.sequence.phases_radians();
    let base = match &run.model {
        CycleModel::Static(c) => cycle_propagator_static(c, 0.0),
        CycleModel::Integrated(cycle) => cycle.base_propagator()?,
    };
    Ok(compose_phased(&base, &phases).pow(run.repetitions))
}

/// Ideal (`p = 1`) sequence propagator for pulses with off-diagonal phase `beta`.
pub fn ideal_propagator(phases: &[f64], beta: f64) -> Unitary2 {
    let ideal = make_propagator(&PulseParams {
        p: 1.0,
        alpha: 0.0,
        beta,
    })
    .expect("p = 1 is valid");
    compose_phased(&ideal, phases)
}

/// Target of a UR sequence: ideal cycles with phases from `ur_phases(n, phi2)`
/// shifted by `phi_tilde`, and `α = β = δ = 0`.
pub fn target_propagator(
    n: usize,
    phi2: PiFraction,
    phi_tilde: PiFraction,
    sign: Sign,
) -> Result<Unitary2> {
    let seq = ur_phases(n, phi2, sign)?.with_offset(phi_tilde);
    Ok(ideal_propagator(&seq.phases_radians(), 0.0))
}

/// Target for an arbitrary phase sequence with `β = 0`.
pub fn sequence_target(seq: &PhaseSequence) -> Unitary2 {
    ideal_propagator(&seq.phases_radians(), 0.0)
}

/// Off-diagonal phase of the error-free pulse of a run, which fixes the frame
/// of its ideal target.
fn nominal_beta(model: &CycleModel) -> Result<f64> {
    match model {
        CycleModel::Static(c) => Ok(c.pulse.beta),
        CycleModel::Integrated(cycle) => nominal_pulse_beta(&cycle.drive, &cycle.integrator),
    }
}

/// `β` of `drive` with its amplitude error and detuning removed.
pub fn nominal_pulse_beta(drive: &DriveConfig, integrator: &IntegratorConfig) -> Result<f64> {
    let nominal = DriveConfig {
        amplitude_error: 0.0,
        static_detuning: 0.0,
        ..*drive
    };
    let u = pulse_propagator(&nominal, integrator)?;
    Ok(extract_params(&u)?.params.beta)
}

/// Fidelity of a run against `U0^N`, where `U0` is the ideal-pulse
/// composition of the same phases.
pub fn run_fidelity(run: &SequenceRun) -> Result<Fidelity> {
    let u = sequence_propagator(run)?;
    let phases = run.sequence.phases_radians();
    let target = ideal_propagator(&phases, nominal_beta(&run.model)?).pow(run.repetitions);
    Ok(fidelity_unchecked(&u, &target))
}

/// Closed-form fidelity error of a UR sequence with identical cycles:
/// `2 (1-p)^{n/2} sin²[n/2 (α + δ - π/2 - φ2/2)]`.
///
/// The fidelity is `|1 - that expression|`, so the returned error is
/// `1 - |1 - ε|`; the two agree whenever the expression is at most 1, which
/// always holds for `p ≥ 1/2`.
pub fn analytic_error_ur(n: usize, p: f64, alpha: f64, delta: f64, phi2: f64) -> f64 {
    let half = n as f64 / 2.0;
    let s = (half * (alpha + delta - FRAC_PI_2 - phi2 / 2.0)).sin();
    let raw = 2.0 * (1.0 - p).powf(half) * s * s;
    fold_error(raw)
}

/// Closed-form fidelity error of the two-pulse sequence `(0, φ2)`:
/// `2 (1-p) cos²(α + δ - φ2/2)`, folded like [`analytic_error_ur`].
pub fn analytic_error_cpmg(p: f64, alpha: f64, delta: f64, phi2: f64) -> f64 {
    let c = (alpha + delta - phi2 / 2.0).cos();
    fold_error(2.0 * (1.0 - p) * c * c)
}

fn fold_error(raw: f64) -> f64 {
    (1.0 - (1.0 - raw).abs()).clamp(0.0, 1.0)
}
