//! Serialisable form of phase sequences.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::sequences::{PhaseSequence, PiFraction};

/// Phases written as exact fractions of π, e.g. `"3/5"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SequenceRecord {
    pub name: String,
    pub n: usize,
    pub phi2_over_pi: Option<String>,
    pub phases_over_pi: Vec<String>,
}

impl From<&PhaseSequence> for SequenceRecord {
    fn from(seq: &PhaseSequence) -> Self {
        SequenceRecord {
            name: seq.name.clone(),
            n: seq.n(),
            phi2_over_pi: seq.phi2.map(|f| f.to_string()),
            phases_over_pi: seq.phases.iter().map(PiFraction::to_string).collect(),
        }
    }
}

impl SequenceRecord {
    /// Rebuilds the sequence, checking every fraction.
    pub fn to_sequence(&self) -> crate::Result<PhaseSequence> {
        let phases = self
            .phases_over_pi
            .iter()
            .map(|s| s.parse())
            .collect::<crate::Result<Vec<PiFraction>>>()?;
        if phases.len() != self.n {
            return Err(crate::Error::InvalidConfig(format!(
                "n = {} but {} phases given",
                self.n,
                phases.len()
            )));
        }
        Ok(PhaseSequence {
            name: self.name.clone(),
            phases,
            phi2: self.phi2_over_pi.as_deref().map(str::parse).transpose()?,
            big_phi: None,
        })
    }
}

pub const SEQUENCE_CSV_HEADER: &str = "index,phase_over_pi";

/// One row per pulse, `index` counting from 1.
pub fn write_sequence_csv<W: Write>(out: &mut W, seq: &PhaseSequence) -> io::Result<()> {
    writeln!(out, "{SEQUENCE_CSV_HEADER}")?;
    for (k, phase) in seq.phases.iter().enumerate() {
        writeln!(out, "{},{}", k + 1, phase)?;
    }
    Ok(())
}
