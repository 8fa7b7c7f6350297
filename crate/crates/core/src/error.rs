use thiserror::Error;

/// Errors raised by the physics and geometry layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A table-driven model was asked for a value outside its tabulated range.
    #[error("{quantity} = {value} is outside the supported range [{min}, {max}]")]
    Coverage {
        quantity: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// A coefficient table failed to load or did not match its checksum.
    #[error("data table error: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn coverage(quantity: impl Into<String>, value: f64, min: f64, max: f64) -> Self {
        Error::Coverage {
            quantity: quantity.into(),
            value,
            min,
            max,
        }
    }

    /// Process exit code for command-line front ends: 2 for validation
    /// failures, 3 for physics coverage and data-table failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Coverage { .. } | Error::Data(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
