//! Crate-wide error type.

/// Errors produced by estimator, kernel and harness operations.
///
/// `Tie` is the typed signal for degenerate estimator configurations: rank
/// collisions after flooring, repeated order statistics at the used levels,
/// or quantile gaps of mixed sign. These never silently become zeros because
/// that would bias any Monte Carlo statistic built on top.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Degenerate estimator evaluation (rank collision or zero/mixed-sign gap).
    #[error("tie: {0}")]
    Tie(String),

    /// A precondition on arguments or configuration does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A support point lies where the estimator is zero by convention
    /// (`s^2 < k/n`); integrating over it would bias the estimate.
    #[error("support point s={s} lies in the zero-convention region (s^2 < k/n with k={k}, n={n})")]
    ZeroRegion { s: f64, k: usize, n: usize },

    /// Covariance factorization failed even after jitter escalation.
    #[error("kernel not positive semidefinite on grid (last jitter {jitter:e})")]
    NotPsd { jitter: f64 },

    /// A linear system stayed singular after ridge escalation.
    #[error("singular system: {0}")]
    Singular(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code class: 2 for validation errors, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Tie(_) | Error::NotPsd { .. } | Error::Singular(_) => 3,
            _ => 2,
        }
    }

    /// Short machine-readable kind tag used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Tie(_) => "tie",
            Error::InvalidInput(_) => "invalid-input",
            Error::ZeroRegion { .. } => "zero-region",
            Error::NotPsd { .. } => "not-psd",
            Error::Singular(_) => "singular",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
