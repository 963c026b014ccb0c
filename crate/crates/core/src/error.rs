use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel order mismatch: declared {declared}, moments vanish up to {scanned}")]
    OrderMismatch { declared: u32, scanned: u32 },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("offset {offset} lies outside the randomizer support [-{epsilon}, {epsilon}]")]
    OutsideSupport { offset: f64, epsilon: f64 },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state must be positive, got {0}")]
    NonPositiveState(f64),
    #[error("sample set is empty")]
    EmptySample,
    #[error("bandwidth must be positive, got {0}")]
    DegenerateBandwidth(f64),
    #[error("randomizer mismatch: {0}")]
    RandomizerMismatch(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("double-kernel estimator needs a second kernel")]
    MissingSecondKernel,
    #[error("the score of the state is not available in closed form")]
    ScoreUnavailable,
    #[error("finite-difference bump must be positive, got {0}")]
    DegenerateBump(f64),
    #[error("pilot needs at least {needed} draws, got {got}")]
    InsufficientPilot { needed: usize, got: usize },
    #[error("pilot log-states have zero variance")]
    DegenerateVariance,
    #[error("variance constant must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("need at least {needed} replications, got {got}")]
    InsufficientReplications { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
