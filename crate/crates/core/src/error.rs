use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("row {row} lies on the support boundary of the GEV link (1 - tau * eta <= 0)")]
    BoundaryRow { row: usize },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate response: every observation has y = {0}, no finite maximum likelihood estimate exists")]
    DegenerateResponse(u8),

    #[error("too few observations: n = {n} but the model has k = {k} free parameters")]
    TooFewObservations { n: usize, k: usize },

    #[error("unknown {kind} '{name}' (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("standard error unavailable for coefficient '{0}'")]
    SeUnavailable(String),

    #[error("simulation failed: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
