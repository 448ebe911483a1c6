use thiserror::Error;

/// Library-wide error type. Variants split into configuration/schema problems
/// (bad inputs, rejected before any numerics run) and numerical refusals
/// (a computation that declines to certify its answer rather than degrade
/// silently).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0}")]
    InvalidParam(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("unsupported profile for exact integration: {0}")]
    UnsupportedProfile(String),

    #[error(
        "exactness budget exceeded: integrand needs degree {needed}, rule declared for {declared}"
    )]
    ExactnessExceeded { needed: u32, declared: u32 },

    #[error(
        "adaptive quadrature did not reach tolerance {tol:.1e} within {budget} nodes \
         (error estimate {estimate:.3e})"
    )]
    QuadratureBudget { estimate: f64, tol: f64, budget: usize },

    #[error(
        "ambiguous zero at degree {s}: |omega| = {value:.3e} lies between eps_zero = {eps:.1e} \
         and 10*eps_zero"
    )]
    AmbiguousZero { s: u32, value: f64, eps: f64 },

    #[error("reciprocal-sum class not derivable: {0}")]
    UnknownClass(String),

    #[error("ill-conditioned Gram solve: {0}")]
    IllConditioned(String),

    #[error("insufficient constraint slack on diagonal {diagonal}: {rows} rows for {cols} unknowns")]
    InsufficientSlack {
        diagonal: String,
        rows: usize,
        cols: usize,
    },

    #[error(
        "indeterminate nullspace: sigma_min = {sigma:.3e} lies in [{lo:.1e}, {hi:.1e}); \
         enlarge the constraint degree or adjust thresholds"
    )]
    IndeterminateRank { sigma: f64, lo: f64, hi: f64 },

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("zero certification failed: {0}")]
    NotCertified(String),
}

impl Error {
    /// True for errors caused by bad configuration or schema-invalid input,
    /// as opposed to numerical refusals on valid input.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidParam(_)
                | Error::Domain(_)
                | Error::Schema { .. }
                | Error::UnsupportedProfile(_)
                | Error::ExactnessExceeded { .. }
                | Error::InsufficientSlack { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
