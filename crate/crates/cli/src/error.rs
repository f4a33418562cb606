//! Exit-code classification: 0 success, 1 validation error, 2 runtime
//! failure.

use std::fmt::Display;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

pub fn validation(msg: impl Display) -> CliError {
    CliError::Validation(msg.to_string())
}

pub fn runtime(msg: impl Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

impl From<qroute_core::Error> for CliError {
    fn from(e: qroute_core::Error) -> Self {
        use qroute_core::Error::*;
        match &e {
            InvalidInstance(_) | InvalidArgument(_) | Unsupported(_) | LengthMismatch { .. }
            | AsymmetricAdjacency(..) | NoSink | TooLarge { .. } | InfeasiblePacking { .. }
            | Json(_) => CliError::Validation(e.to_string()),
            Io(_) | EigenNoConvergence { .. } | EmptyCluster { .. } => {
                CliError::Runtime(e.to_string())
            }
        }
    }
}
