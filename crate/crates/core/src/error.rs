use thiserror::Error;

/// Errors raised by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite numeric input: {0}")]
    Numeric(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("codebook of 2^{bits} entries in dimension {n_t} needs {required_bytes} bytes, budget is {budget_bytes}")]
    Capacity {
        n_t: usize,
        bits: u32,
        required_bytes: u128,
        budget_bytes: u128,
    },

    #[error("ill-conditioned direction set (condition number {condition_number:.3e})")]
    Conditioning { condition_number: f64 },

    #[error("no feedback budget up to {max_bits} bits reaches a rate loss of {target} bps/Hz")]
    Infeasible { target: f64, max_bits: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the `qmiso` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) | Error::Numeric(_) => 2,
            Error::Capacity { .. } => 3,
            Error::Conditioning { .. } | Error::DegenerateInput(_) => 4,
            Error::Validation(_) => 5,
            Error::Infeasible { .. } => 6,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
