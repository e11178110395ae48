use thiserror::Error;

use crate::sdp::SolverStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("Kraus operators are not complete (max deviation from identity {0:.3e})")]
    IncompleteKraus(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("map is not a CPTP channel: {0}")]
    NotCptp(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("SDP solver returned {status:?}: {detail}")]
    Solver {
        status: SolverStatus,
        detail: String,
    },

    #[error("optimal-pair extraction failed: {0}")]
    Extraction(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 1,
            Error::Solver { .. } | Error::Extraction(_) => 3,
            _ => 2,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Solver { .. } => "solver",
            Error::Extraction(_) => "extraction",
            _ => "validation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
