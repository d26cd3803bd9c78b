use thiserror::Error;

/// Errors raised by the simulator and the analytical routines.
///
/// Infeasible power allocations are not errors; they are reported through
/// [`crate::power::PowerAllocation::feasible`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("cannot parse value `{value}` for key `{key}`")]
    ParseValue { key: String, value: String },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("zero forcing needs M_b > K - 1 + L_rx (M_b = {m_b}, K - 1 + L_rx = {required})")]
    AntennaShortage { m_b: usize, required: usize },

    #[error("stacked channel matrix is ill conditioned (smallest/largest singular value = {ratio:e})")]
    IllConditioned { ratio: f64 },

    #[error("beamforming gain of SU {su} is not positive")]
    ZeroGain { su: usize },

    #[error("expected {expected} beams, got {got}")]
    WrongScheme { expected: &'static str, got: &'static str },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("SINR denominator is deterministic (K = 1 and L_tx = 0)")]
    DegenerateDenominator,

    #[error("generalized-F SINR model needs at least one PU transmitter")]
    NoPuTransmitters,

    #[error("empty sample set")]
    EmptySamples,

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
