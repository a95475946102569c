//! JSON run configurations.

use serde::Deserialize;
use urdd_core::ensemble::{DdProtocol, EnsembleSpec, PulseModel};
use urdd_core::pulse::{IntegratorConfig, PulseShape, DEFAULT_STEPS_PER_PULSE};
use urdd_core::sweeps::{MapProtocol, MapPulse, SweepGrid};

pub const SCHEMA_VERSION: u32 = 1;

fn default_tau_over_t() -> f64 {
    4.0
}

fn default_steps() -> usize {
    DEFAULT_STEPS_PER_PULSE
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    /// Sequence label, e.g. `UR20`, `KDD_XY4`, `CPMG`.
    pub sequence: String,
    pub total_pulses: usize,
    #[serde(default)]
    pub grid: SweepGrid,
    #[serde(default = "default_tau_over_t")]
    pub tau_over_t: f64,
    #[serde(default)]
    pub pulse: MapPulse,
    #[serde(default = "default_steps")]
    pub steps_per_pulse: usize,
}

impl SweepConfig {
    pub fn protocol(&self) -> MapProtocol {
        MapProtocol {
            tau_over_t: self.tau_over_t,
            pulse: self.pulse,
            integrator: IntegratorConfig::with_steps(self.steps_per_pulse),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EnsembleConfig {
    pub schema_version: u32,
    pub ensemble: EnsembleSpec,
    /// Pulse shape in SI units (seconds, rad/s).
    pub pulse: PulseShape,
    /// Pulse separation τ, seconds.
    pub tau: f64,
    #[serde(default)]
    pub pulse_model: PulseModel,
    #[serde(default = "default_steps")]
    pub steps_per_pulse: usize,
}

impl EnsembleConfig {
    pub fn protocol(&self) -> DdProtocol {
        DdProtocol {
            pulse_model: self.pulse_model,
            integrator: IntegratorConfig::with_steps(self.steps_per_pulse),
            ..DdProtocol::new(self.pulse, self.tau)
        }
    }
}

/// Parses `text` and checks the schema version.
pub fn parse<T: for<'de> Deserialize<'de> + Versioned>(text: &str) -> Result<T, String> {
    let cfg: T = serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(format!(
            "unsupported schemaVersion {}, expected {SCHEMA_VERSION}",
            cfg.schema_version()
        ));
    }
    Ok(cfg)
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

impl Versioned for SweepConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl Versioned for EnsembleConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}
