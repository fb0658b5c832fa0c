use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unknown hydrate level x={level} for sorbent {sorbent}")]
    UnknownHydrate { sorbent: String, level: u32 },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("solver diverged at t={time} s: {detail}")]
    SolverDivergence { time: f64, detail: String },

    #[error("steady-state iteration failed to converge after {iterations} iterations (residual {residual:e} W)")]
    NumericFailure { iterations: usize, residual: f64 },

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Errors raised while reading or validating a scenario document.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error("unknown sorbent `{0}`")]
    UnknownSorbent(String),

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
