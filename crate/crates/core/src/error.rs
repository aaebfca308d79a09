use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Scenario file problem, anchored to the offending line (1-based).
    #[error("{}:{line}: {message}", path.display())]
    Scenario {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("capacity is undefined for SNR {0}")]
    Domain(f64),

    #[error("A2 is not feasible for this subset: some member hears the BS at least as well as the RS")]
    A2Infeasible,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the CLI: 1 for configuration problems, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) => 2,
            _ => 1,
        }
    }
}
