use thiserror::Error;

/// Errors raised by the simulation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("cannot compose an empty list of propagators")]
    EmptyComposition,

    #[error("invalid sequence order n = {n}: {reason}")]
    InvalidOrder { n: usize, reason: &'static str },

    #[error("unknown sequence name `{0}`")]
    UnknownSequence(String),

    #[error("invalid rational phase `{0}`")]
    InvalidRational(String),

    #[error("{total} pulses cannot be split into repetitions of a {n}-pulse sequence")]
    NotDivisible { total: usize, n: usize },

    #[error("storage time {storage_time:e} s is shorter than one sequence ({sequence_time:e} s)")]
    StorageTooShort {
        storage_time: f64,
        sequence_time: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
