use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chain length must be at least 1, got {0}")]
    EmptyChain(usize),
    #[error("site {site} outside chain of length {len}")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("block size must be at least 1")]
    EmptyBlock,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("chain of {n} sites exceeds oracle cap of {cap}")]
    ChainTooLarge { n: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("t = {0} is a singular point of the closed form")]
    Singular(f64),
    #[error("terms = {terms} too few for t = {t}: tail contribution {tail:e}")]
    InsufficientTerms { t: f64, terms: usize, tail: f64 },
    #[error("{protocol} did not finish within {cap} iterations")]
    IterationCap { protocol: &'static str, cap: usize },
    #[error("{0} is not a unitary switching time")]
    NonUnitaryTime(f64),
    #[error("qubit leaked into measured boundary site {0}")]
    Leak(usize),
    #[error("malformed schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
