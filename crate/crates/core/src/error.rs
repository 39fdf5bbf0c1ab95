use thiserror::Error;

use crate::graph::NetworkError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Network(#[from] NetworkError),

    #[error("missing value for source `{0}`")]
    MissingSource(String),

    #[error("time step {dt:e} s exceeds the stability bound {bound:e} s (min tau / 20)")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("invalid stimulus: {0}")]
    Stimulus(String),

    #[error(
        "spike separation violated: events at {first:e} s and {second:e} s are closer than {min_gap:e} s"
    )]
    SpikeSeparation {
        first: f64,
        second: f64,
        min_gap: f64,
    },

    #[error("unknown block `{0}`")]
    UnknownBlock(String),

    #[error("{0}")]
    Analysis(String),
}
