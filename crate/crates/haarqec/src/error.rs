use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("rank-deficient input: smallest singular value {s_min:.3e} is below the rank tolerance {threshold:.3e}")]
    RankDeficient { s_min: f64, threshold: f64 },

    /// The shifted basis fails to have full rank, so the rounded decoder is
    /// ill-defined (the certified delta is at least 1).
    #[error("shifted basis is rank-deficient (singular value {s_min:.3e} below tolerance {threshold:.3e}); delta >= 1, resample the code or shrink the error set")]
    NondegenerateRank { s_min: f64, threshold: f64 },

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("memory budget exceeded: needs {needed} complex entries, cap is {cap}")]
    BudgetExceeded { needed: usize, cap: usize },

    #[error("input is not a density operator: {0}")]
    NotDensity(String),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("channel violates trace preservation: defect {defect:.3e}")]
    CptpViolation { defect: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
