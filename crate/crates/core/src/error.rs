use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid camera configuration: {0}")]
    InvalidConfig(String),
    #[error("depth level {0} is outside [0, 255]")]
    DepthOutOfRange(i64),
    #[error("value {0} is not finite")]
    NonFinite(f64),
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("occlusion group is empty")]
    EmptyGroup,
    #[error("invalid gaussian spread {0}; expected a positive value or infinity")]
    InvalidSigma(f64),
    #[error("invalid depth change vector: {0}")]
    InvalidVector(String),
    #[error("exhaustive search over {size} vectors exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u64 },
    #[error("rate budget of {budget} bits is infeasible; the minimal achievable rate is {min_rate} bits")]
    InfeasibleBudget { budget: f64, min_rate: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rate-distortion curves have no overlapping quality range")]
    NoQualityOverlap,
    #[error("invalid rate-distortion curve: {0}")]
    InvalidCurve(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
