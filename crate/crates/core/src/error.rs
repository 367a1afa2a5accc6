use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("first-stage precoder infeasible for group {group}: {reason}")]
    InfeasibleFirstStage { group: usize, reason: String },

    #[error("degenerate beam {beam}: zero diagonal entry in V V^H")]
    DegenerateBeam { beam: usize },

    #[error("zero-forcing failed for user {user}: other users' effective channels are rank deficient")]
    RankDeficient { user: usize },

    #[error("no precoder available for the serving macro BS")]
    MissingPrecoder,

    #[error("point (r_m = {r_m}, r_s = {r_s}) lies outside the [0, {max_rm}] x [0, {max_rs}] rectangle")]
    OutOfRectangle {
        r_m: f64,
        r_s: f64,
        max_rm: f64,
        max_rs: f64,
    },

    #[error("quadrature did not converge: last estimate {last}, previous {previous}")]
    NonConvergence { last: f64, previous: f64 },

    #[error("outage curve decreases by {drop:.3e} at threshold {threshold_db} dB")]
    NonMonotone { threshold_db: f64, drop: f64 },

    #[error("{failed} of {total} drops failed, above the 0.1% budget (first error: {first})")]
    TooManyDropErrors {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("config hash mismatch in {path}: expected {expected}, found {found}")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config { .. } | Error::HashMismatch { .. } => 2,
            Error::Io(_) | Error::Csv(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
