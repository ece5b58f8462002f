use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("(alpha={alpha}, beta={beta}) is outside the admissible parameter set")]
    OutOfSetA { alpha: f64, beta: f64 },
    #[error("scale c must be positive, got {0}")]
    NonpositiveScale(f64),
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
    #[error("window [{r}, {n}] does not fit a path with {len} points")]
    WindowOutOfRange { r: usize, n: usize, len: usize },
    #[error("only {accepted} of {target} paths accepted after {attempts} attempts")]
    BudgetExhausted { accepted: usize, target: usize, attempts: u64 },
    #[error("effective sample size {ess:.1} is below 10% of the target {target}")]
    DegenerateWeights { ess: f64, target: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("ladder epoch exceeded the step cap of {cap} after {completed} completed epochs")]
    EpochBudgetExceeded { cap: u64, completed: usize },
    #[error("renewal truncation too severe: {0}")]
    TruncationTooSevere(String),
    #[error("constant estimates disagree: {0}")]
    InconsistentEstimates(String),
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("regime violation: {0}")]
    RegimeViolation(String),
    #[error("sampler shortfall: {0}")]
    SamplerShortfall(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("i/o failure: {0}")]
    IoFailure(String),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}
