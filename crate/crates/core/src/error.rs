use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Each variant maps to a stable, module-qualified code (see [`Error::code`])
/// that the command-line front end emits in its machine-readable error
/// objects.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {observations} usable observations, need more than {needed}")]
    InsufficientData { observations: usize, needed: usize },

    #[error("lag regressor matrix is numerically singular (reciprocal condition {rcond:e})")]
    SingularRegressors { rcond: f64 },

    #[error("autocovariance recursion requires a VAR(1) model, got lag order {k}")]
    NotVar1 { k: usize },

    #[error("model is not stationary: largest companion root modulus {modulus}")]
    NonStationary { modulus: f64 },

    #[error("transfer function is singular at angular frequency {omega}")]
    SingularAtFrequency { omega: f64 },

    #[error("innovation covariance is degenerate: {0}")]
    DegenerateCovariance(String),

    #[error("causality value {value:e} at angular frequency {omega} is negative beyond tolerance")]
    NumericalInconsistency { value: f64, omega: f64 },

    #[error("bivariate and trivariate models were fitted on different sample windows")]
    MisalignedModels,

    #[error("{failed} of {total} bootstrap replicates failed (limit is 10%)")]
    ReplicateFailure { failed: usize, total: usize },

    #[error("quantile of an empty sample")]
    EmptySample,

    #[error("frequency-domain F test needs at least two lags at interior frequencies, got k = {k}")]
    InsufficientLags { k: usize },

    #[error("restriction matrix loses rank at angular frequency {omega}")]
    SingularRestriction { omega: f64 },

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("series of length {len} is too short (need at least {min})")]
    TooShort { len: usize, min: usize },

    #[error("simulated path exploded (|value| > 1e12) at step {step}")]
    ExplodingPath { step: usize },

    #[error("invalid simulation design: {0}")]
    InvalidDesign(String),

    #[error("{failed} of {total} Monte Carlo trials failed (limit is 10%); first error: {first}")]
    TrialFailure {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("column '{0}' not found")]
    MissingColumn(String),

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, prefixed by the module that raised it.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "CORE_INVALID_INPUT",
            Error::InsufficientData { .. } => "VAR_INSUFFICIENT_DATA",
            Error::SingularRegressors { .. } => "VAR_SINGULAR_REGRESSORS",
            Error::NotVar1 { .. } => "VAR_NOT_VAR1",
            Error::NonStationary { .. } => "VAR_NON_STATIONARY",
            Error::SingularAtFrequency { .. } => "SPECTRA_SINGULAR_AT_FREQUENCY",
            Error::DegenerateCovariance(_) => "SPECTRA_DEGENERATE_COVARIANCE",
            Error::NumericalInconsistency { .. } => "SPECTRA_NUMERICAL_INCONSISTENCY",
            Error::MisalignedModels => "SPECTRA_MISALIGNED_MODELS",
            Error::ReplicateFailure { .. } => "BOOTSTRAP_REPLICATE_FAILURE",
            Error::EmptySample => "BOOTSTRAP_EMPTY_SAMPLE",
            Error::InsufficientLags { .. } => "BC_INSUFFICIENT_LAGS",
            Error::SingularRestriction { .. } => "BC_SINGULAR_RESTRICTION",
            Error::Domain(_) => "BC_DOMAIN_ERROR",
            Error::TooShort { .. } => "FILTERS_TOO_SHORT",
            Error::ExplodingPath { .. } => "SIM_EXPLODING_PATH",
            Error::InvalidDesign(_) => "SIM_INVALID_DESIGN",
            Error::TrialFailure { .. } => "SIM_TRIAL_FAILURE",
            Error::Parse { .. } => "IO_PARSE_ERROR",
            Error::MissingColumn(_) => "IO_MISSING_COLUMN",
            Error::NonNumeric { .. } => "IO_NON_NUMERIC",
            Error::Config(_) => "IO_CONFIG",
            Error::Io(_) => "IO_ERROR",
        }
    }
}
