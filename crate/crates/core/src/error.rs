use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by estimators, bootstrap machinery and simulation drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed step function construction.
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    /// The sample violates the observation model (empty, non-positive times, ...).
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// An argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A distribution function never reaches the requested level.
    #[error("mass deficit: distribution does not reach level {level}")]
    MassDeficit { level: f64 },

    /// A ratio estimator was evaluated where the fitted survival curve is zero.
    #[error("{0}")]
    OutsideSupport(String),

    /// Every bootstrap replicate produced an undefined statistic.
    #[error("bootstrap degenerate: all {replicates} replicates dropped")]
    BootstrapDegenerate { replicates: usize },

    /// The requested closed-form truth is not available for the data model.
    #[error("truth unavailable: {0}")]
    TruthUnavailable(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI's JSON error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidStepFunction(_) => "invalid_step_function",
            Error::InvalidSample(_) => "invalid_sample",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::MassDeficit { .. } => "mass_deficit",
            Error::OutsideSupport(_) => "outside_support",
            Error::BootstrapDegenerate { .. } => "bootstrap_degenerate",
            Error::TruthUnavailable(_) => "truth_unavailable",
        }
    }
}
