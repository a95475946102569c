//! Propagators of finite-duration pulses.
//!
//! In the rotating frame the two-level Hamiltonian during a pulse is
//!
//! ```text
//!   h(t) = 1/2 [[ Δ(t),            Ω(t) e^{iφ} ],
//!               [ Ω(t) e^{-iφ},   -Δ(t)        ]]
//! ```
//!
//! and free evolution is `h = Δ σ_z / 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{expi, Unitary2};

/// Envelope and frequency profile of one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum PulseShape {
    /// Constant Rabi frequency over `[0, duration]`.
    #[serde(rename_all = "camelCase")]
    Rectangular { duration: f64, peak_rabi: f64 },
    /// `Ω0 exp(-(t - T/2)² / 2σ²)` truncated to `[0, T]`. `width` defaults to `T/6`.
    #[serde(rename_all = "camelCase")]
    Gaussian {
        duration: f64,
        peak_rabi: f64,
        #[serde(default, rename = "gaussianWidth")]
        width: Option<f64>,
    },
    /// Constant amplitude with a linear detuning sweep `c (t - T/2)`.
    #[serde(rename_all = "camelCase")]
    ChirpedRectangular {
        duration: f64,
        peak_rabi: f64,
        chirp_rate: f64,
    },
}

impl PulseShape {
    pub fn rectangular(duration: f64, peak_rabi: f64) -> Self {
        PulseShape::Rectangular {
            duration,
            peak_rabi,
        }
    }

    pub fn gaussian(duration: f64, peak_rabi: f64) -> Self {
        PulseShape::Gaussian {
            duration,
            peak_rabi,
            width: None,
        }
    }

    pub fn duration(&self) -> f64 {
        match *self {
            PulseShape::Rectangular { duration, .. }
            | PulseShape::Gaussian { duration, .. }
            | PulseShape::ChirpedRectangular { duration, .. } => duration,
        }
    }

    pub fn peak_rabi(&self) -> f64 {
        match *self {
            PulseShape::Rectangular { peak_rabi, .. }
            | PulseShape::Gaussian { peak_rabi, .. }
            | PulseShape::ChirpedRectangular { peak_rabi, .. } => peak_rabi,
        }
    }

    fn gaussian_width(&self) -> Option<f64> {
        match *self {
            PulseShape::Gaussian {
                duration, width, ..
            } => Some(width.unwrap_or(duration / 6.0)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.duration();
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pulse duration must be positive, got {t}"
            )));
        }
        let w = self.peak_rabi();
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "peak Rabi frequency must be non-negative, got {w}"
            )));
        }
        if let Some(sigma) = self.gaussian_width() {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "Gaussian width must be positive, got {sigma}"
                )));
            }
        }
        if let PulseShape::ChirpedRectangular { chirp_rate, .. } = *self {
            if !chirp_rate.is_finite() {
                return Err(Error::InvalidConfig("chirp rate must be finite".into()));
            }
        }
        Ok(())
    }

    /// Rabi envelope at time `t ∈ [0, T]` before any amplitude error.
    pub fn envelope(&self, t: f64) -> f64 {
        match *self {
            PulseShape::Rectangular { peak_rabi, .. }
            | PulseShape::ChirpedRectangular { peak_rabi, .. } => peak_rabi,
            PulseShape::Gaussian {
                duration,
                peak_rabi,
                ..
            } => {
                let sigma = self.gaussian_width().unwrap();
                let x = t - duration / 2.0;
                peak_rabi * (-x * x / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    /// Detuning added by the chirp at time `t`.
    pub fn chirp_offset(&self, t: f64) -> f64 {
        match *self {
            PulseShape::ChirpedRectangular {
                duration,
                chirp_rate,
                ..
            } => chirp_rate * (t - duration / 2.0),
            _ => 0.0,
        }
    }

    /// Pulse area `∫ Ω(t) dt` over `[0, T]`.
    pub fn area(&self) -> f64 {
        match *self {
            PulseShape::Rectangular {
                duration,
                peak_rabi,
            }
            | PulseShape::ChirpedRectangular {
                duration,
                peak_rabi,
                ..
            } => duration * peak_rabi,
            PulseShape::Gaussian {
                duration,
                peak_rabi,
                ..
            } => {
                let sigma = self.gaussian_width().unwrap();
                let half = duration / (2.0 * std::f64::consts::SQRT_2 * sigma);
                peak_rabi * sigma * (2.0 * PI).sqrt() * libm::erf(half)
            }
        }
    }

    /// Same shape with the peak Rabi frequency rescaled to reach `area`.
    pub fn with_area(&self, area: f64) -> PulseShape {
        let unit = self.with_peak(1.0).area();
        self.with_peak(area / unit)
    }

    pub fn with_peak(&self, peak: f64) -> PulseShape {
        let mut s = *self;
        match &mut s {
            PulseShape::Rectangular { peak_rabi, .. }
            | PulseShape::Gaussian { peak_rabi, .. }
            | PulseShape::ChirpedRectangular { peak_rabi, .. } => *peak_rabi = peak,
        }
        s
    }
}

/// A physical pulse with its static errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub shape: PulseShape,
    /// Relative Rabi-frequency error: `Ω(t) -> (1 + ε_a) Ω(t)`.
    pub amplitude_error: f64,
    /// Qubit offset minus drive offset, rad/s, applied for the whole pulse.
    pub static_detuning: f64,
    /// Phase of the drive, radians.
    pub drive_phase: f64,
}

impl DriveConfig {
    pub fn new(shape: PulseShape) -> Self {
        DriveConfig {
            shape,
            amplitude_error: 0.0,
            static_detuning: 0.0,
            drive_phase: 0.0,
        }
    }

    pub fn with_errors(mut self, static_detuning: f64, amplitude_error: f64) -> Self {
        self.static_detuning = static_detuning;
        self.amplitude_error = amplitude_error;
        self
    }

    pub fn with_phase(mut self, drive_phase: f64) -> Self {
        self.drive_phase = drive_phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        if self.amplitude_error.is_nan() || self.amplitude_error < -1.0 {
            return Err(Error::InvalidConfig(format!(
                "amplitude error {} drives the Rabi frequency negative",
                self.amplitude_error
            )));
        }
        if !self.static_detuning.is_finite() || !self.drive_phase.is_finite() {
            return Err(Error::InvalidConfig(
                "detuning and phase must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IntegrationMethod {
    /// Midpoint-sampled Hamiltonian held constant over each step, exponentiated exactly.
    #[default]
    PiecewiseConstantExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegratorConfig {
    pub steps_per_pulse: usize,
    pub method: IntegrationMethod,
}

pub const DEFAULT_STEPS_PER_PULSE: usize = 2000;
pub const MIN_STEPS_PER_PULSE: usize = 16;

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            steps_per_pulse: DEFAULT_STEPS_PER_PULSE,
            method: IntegrationMethod::PiecewiseConstantExponential,
        }
    }
}

impl IntegratorConfig {
    pub fn with_steps(steps_per_pulse: usize) -> Self {
        IntegratorConfig {
            steps_per_pulse,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_pulse < MIN_STEPS_PER_PULSE {
            return Err(Error::InvalidConfig(format!(
                "stepsPerPulse must be at least {MIN_STEPS_PER_PULSE}, got {}",
                self.steps_per_pulse
            )));
        }
        Ok(())
    }
}

/// `exp(-i dt (hx σx + hy σy + hz σz))`
#[inline]
fn step_exponential(hx: f64, hy: f64, hz: f64, dt: f64) -> Unitary2 {
    let norm = (hx * hx + hy * hy + hz * hz).sqrt();
    let theta = norm * dt;
    let c = theta.cos();
    // sin(θ)/|h|, continuous at |h| = 0
    let s = if theta.abs() < 1e-8 {
        dt * (1.0 - theta * theta / 6.0)
    } else {
        theta.sin() / norm
    };
    Unitary2::new(
        Complex64::new(c, -s * hz),
        Complex64::new(-s * hy, -s * hx),
        Complex64::new(s * hy, -s * hx),
        Complex64::new(c, s * hz),
    )
}

/// Time-ordered propagator of a single pulse.
pub fn pulse_propagator(cfg: &DriveConfig, icfg: &IntegratorConfig) -> Result<Unitary2> {
    cfg.validate()?;
    icfg.validate()?;
    let shape = &cfg.shape;
    let steps = icfg.steps_per_pulse;
    let dt = shape.duration() / steps as f64;
    let scale = 1.0 + cfg.amplitude_error;
    let (sin_phi, cos_phi) = cfg.drive_phase.sin_cos();
    let constant = matches!(shape, PulseShape::Rectangular { .. });

    let step_at = |t: f64| {
        let omega = scale * shape.envelope(t);
        let detuning = cfg.static_detuning + shape.chirp_offset(t);
        step_exponential(
            0.5 * omega * cos_phi,
            -0.5 * omega * sin_phi,
            0.5 * detuning,
            dt,
        )
    };

    let mut u = Unitary2::IDENTITY;
    if constant {
        let step = step_at(0.5 * dt);
        for _ in 0..steps {
            u = step * u;
        }
    } else {
        for j in 0..steps {
            u = step_at((j as f64 + 0.5) * dt) * u;
        }
    }
    Ok(u)
}

/// Free precession `exp(-i Δ τ σ_z / 2)`.
pub fn free_propagator(detuning: f64, tau: f64) -> Unitary2 {
    let half = detuning * tau / 2.0;
    Unitary2::diag(expi(-half), expi(half))
}

/// Closed-form propagator of a constant drive `(rabi, detuning, phase)`
/// applied for `duration`.
pub fn rect_oracle(rabi: f64, detuning: f64, duration: f64, phase: f64) -> Unitary2 {
    let w = rabi.hypot(detuning);
    if w == 0.0 {
        return Unitary2::IDENTITY;
    }
    let (s, c) = (w * duration / 2.0).sin_cos();
    let axial = Complex64::new(c, -s * detuning / w);
    let transverse = Complex64::new(0.0, -s * rabi / w);
    Unitary2::new(
        axial,
        transverse * expi(phase),
        transverse * expi(-phase),
        axial.conj(),
    )
}
