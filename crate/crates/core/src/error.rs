use thiserror::Error;

/// Errors raised by grid construction, flow evaluation, time stepping and
/// diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite values in {context}")]
    NonFinite { context: &'static str },

    #[error("{context}: field must be positive (min = {min})")]
    NonPositiveField { context: &'static str, min: f64 },

    #[error("degenerate state: field has zero L2 norm")]
    DegenerateField,

    #[error("implicit solve failed: relative residual {residual} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("positivity lost at t = {t} (min = {min})")]
    PositivityLoss { t: f64, min: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Picard window {window} failed: {source}")]
    WindowFailed {
        window: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "Picard iteration did not converge in {iterations} iterations \
         (last distance {last_distance}, contraction factor {contraction})"
    )]
    PicardNonConvergence {
        iterations: usize,
        last_distance: f64,
        contraction: f64,
    },

    #[error("trajectory tail not settled: lambda varied by {tail_variation} (tol {tol})")]
    TailNotConverged { tail_variation: f64, tol: f64 },

    #[error("steady oracle: {0}")]
    OracleFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("trajectory stamp mismatch: {0}")]
    StampMismatch(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("snapshot parse error at line {line}: {message}")]
    SnapshotParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
