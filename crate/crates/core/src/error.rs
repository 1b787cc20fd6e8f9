use thiserror::Error;

use crate::basis::BasisTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state {0} is not in the basis")]
    NotInBasis(String),

    #[error("ladder level {level} out of range for {mode}")]
    LevelOutOfRange { mode: &'static str, level: u32 },

    #[error("basis mismatch: expected {expected:?}, found {found:?}")]
    BasisMismatch { expected: BasisTag, found: BasisTag },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("target energy {target} unattainable after {attempts} attempts")]
    EnergyUnattainable { target: f64, attempts: usize },

    #[error("symmetry broken: residual {0:e}")]
    SymmetryBroken(f64),

    #[error("numerical failure in realization {realization}: {source}")]
    Realization {
        realization: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Tag a failure with the realization it came from.
    pub fn in_realization(self, realization: usize) -> Self {
        match self {
            e @ Error::Realization { .. } => e,
            e => Error::Realization {
                realization,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
