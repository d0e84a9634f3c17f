use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("disorder realization {index} out of range (realization_count = {count})")]
    RealizationOutOfRange { index: usize, count: usize },

    #[error("symmetry mismatch: {0}")]
    SymmetryMismatch(String),

    /// The requested quantity is undefined at a topological phase transition.
    #[error("gapless spectrum (gap {gap:e} below {tolerance:e}): {context}")]
    Gapless {
        gap: f64,
        tolerance: f64,
        context: String,
    },

    #[error("numerical result failed its convergence check (deviation {delta:e})")]
    NonConvergence { delta: f64 },

    #[error("matrix is not Hermitian (max |H - H^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("amplitude ratio undefined: |c_k| = {0:e}")]
    UndefinedRatio(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidSpec(_) => 2,
            Error::Gapless { .. }
            | Error::NonConvergence { .. }
            | Error::NotHermitian(_)
            | Error::SymmetryMismatch(_) => 3,
            _ => 1,
        }
    }
}
