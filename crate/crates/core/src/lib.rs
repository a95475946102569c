//! Universally robust dynamical decoupling: SU(2) propagator algebra, phase
//! sequences, pulse integration, inhomogeneous ensembles and parameter sweeps.
//!
//! Angles are radians unless a name says `over_pi`. A product `a * b` of
//! [`Unitary2`] values applies `b` first.

pub mod dd_model;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod pulse;
pub mod sequences;
pub mod su2;
pub mod sweeps;

pub use dd_model::{
    analytic_error_cpmg, analytic_error_ur, run_fidelity, sequence_propagator, CycleModel,
    CycleParams, IntegratedCycle, SequenceRun,
};
pub use ensemble::{DdProtocol, EnsembleSpec, InitialPhase, PulseModel, StorageResult};
pub use error::{Error, Result};
pub use export::SequenceRecord;
pub use pulse::{DriveConfig, IntegratorConfig, PulseShape};
pub use sequences::{
    baseline, sequence_by_name, symmetric_ur, ur_phases, Baseline, PhaseSequence, PiFraction, Sign,
};
pub use su2::{extract_params, fidelity, make_propagator, Fidelity, PulseParams, Unitary2};
pub use sweeps::{MapProtocol, MapPulse, MapResult, ScalingRow, SweepGrid};

/// Text form used in every output file: 17 significant digits, which
/// round-trips any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
