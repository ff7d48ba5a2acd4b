use thiserror::Error;

/// Error type shared across the crate. The CLI maps variants onto exit
/// codes: config errors -> 1, runtime/integration errors -> 2, I/O -> 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("config error at line {line}: {msg}")]
    ConfigAt { line: usize, msg: String },

    #[error("step size underflow at t = {t:.12e} (state {state:?})")]
    StepSizeUnderflow { t: f64, state: Vec<f64> },

    #[error("non-finite derivative in coordinate `{coord}` at t = {t:.12e}")]
    NonFiniteDerivative { coord: String, t: f64 },

    #[error(
        "friction branch torque {torque:.6e} outside holding interval [{lo:.6e}, {hi:.6e}] on surface {surface}"
    )]
    TorqueOutsideInterval {
        surface: usize,
        torque: f64,
        lo: f64,
        hi: f64,
    },

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI contract.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::ConfigAt { .. } | Error::InvalidParams(_) => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
