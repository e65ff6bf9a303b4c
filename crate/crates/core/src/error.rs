use thiserror::Error;

/// Errors produced by simulation, regression and pricing.
#[derive(Debug, Error)]
pub enum LsmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky factorization of the Gram matrix broke down.
    #[error("singular system: normal equations matrix is numerically singular (kappa = {})", fmt_kappa(*.kappa))]
    SingularSystem { kappa: f64 },

    /// Householder QR found a negligible diagonal entry in R.
    #[error("rank-deficient design matrix (kappa = {})", fmt_kappa(*.kappa))]
    RankDeficient { kappa: f64 },

    /// A regression at an interior exercise date failed.
    #[error("regression failed at date index {date_index} (t = {t}): {source}")]
    SolverFailed {
        date_index: usize,
        t: f64,
        #[source]
        source: Box<LsmError>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl LsmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LsmError::InvalidArgument(msg.into())
    }

    /// Condition number carried by a solver failure, if any.
    pub fn kappa(&self) -> Option<f64> {
        match self {
            LsmError::SingularSystem { kappa } | LsmError::RankDeficient { kappa } => Some(*kappa),
            LsmError::SolverFailed { source, .. } => source.kappa(),
            _ => None,
        }
    }
}

pub(crate) fn fmt_kappa(kappa: f64) -> String {
    if kappa.is_infinite() {
        "inf".to_string()
    } else {
        format!("{kappa:e}")
    }
}

pub type Result<T> = std::result::Result<T, LsmError>;
