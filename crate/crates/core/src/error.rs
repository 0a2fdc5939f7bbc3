use thiserror::Error;

use crate::numeric::{FieldKind, Inertia};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric: residual {residual:.3e} exceeds {threshold:.3e}")]
    Asymmetric { residual: f64, threshold: f64 },

    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: FieldKind, found: FieldKind },

    /// An eigenvalue sits inside the tolerance band, so the inertia is one of
    /// two candidates.
    #[error("near-boundary point: inertia is {lower} or {upper} (margin {margin:.3e})")]
    NearBoundary {
        lower: Inertia,
        upper: Inertia,
        margin: f64,
    },

    #[error("ambiguous rank: singular value {value:.3e} inside the band around {threshold:.3e}")]
    AmbiguousRank { value: f64, threshold: f64 },

    #[error("ill-conditioned intersection: singular value {value:.3e} inside the band around {threshold:.3e}")]
    IllConditioned { value: f64, threshold: f64 },

    #[error("empty orbit: {0}")]
    EmptyOrbit(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("formula violation: {0}")]
    FormulaViolation(String),

    #[error("chart construction failed: {0}")]
    ChartFailed(String),

    #[error("transversality lost: {0}")]
    Transversality(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a decision falling inside the tolerance band.
    pub fn is_ambiguity(&self) -> bool {
        matches!(
            self,
            Error::NearBoundary { .. } | Error::AmbiguousRank { .. } | Error::IllConditioned { .. }
        )
    }
}
