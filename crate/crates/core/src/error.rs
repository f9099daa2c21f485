//! Error taxonomy shared by every module; categories map onto CLI exit codes.

use thiserror::Error;

/// The result type used throughout the crate.
pub type Result<T> = std::result::Result<T, SimError>;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum SimError {
    /// Invalid configuration: bad grids, windows off-grid, plane mismatches,
    /// unknown config keys, malformed input data.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical precondition would be violated (kernel aliasing,
    /// under-resolved structure).
    #[error("numerical precondition error: {0}")]
    Numerics(String),

    /// Malformed user-supplied data (envelope files, profile arrays).
    #[error("data error: {0}")]
    Data(String),

    /// I/O failure while reading a config or writing an output.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub fn numerics(msg: impl Into<String>) -> Self {
        SimError::Numerics(msg.into())
    }

    /// Process exit code for the CLI: 2 configuration/data, 3 numerical,
    /// 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) | SimError::Data(_) => 2,
            SimError::Numerics(_) => 3,
            SimError::Io(_) => 4,
        }
    }
}
