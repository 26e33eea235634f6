use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("binomial coefficient C({n}, {k}) overflows u64")]
    BinomialOverflow { n: u64, k: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid demand vector: {0}")]
    InvalidDemand(String),

    #[error("invalid placement profile: {0}")]
    InvalidProfile(String),

    #[error("{caches} caches exceeds the supported maximum of {max}")]
    TooManyCaches { caches: usize, max: usize },

    #[error("linear program is {0}")]
    LpStatus(crate::lp::LpStatus),

    #[error("linear program is malformed: {0}")]
    MalformedLp(String),

    #[error("numerical breakdown in simplex: {0}")]
    Numerical(String),

    #[error("plan and partition map disagree: {0}")]
    PlanMismatch(String),

    #[error("cache {cache} failed to reconstruct file {file}: first bad symbol at index {index}")]
    DecodeMismatch {
        cache: usize,
        file: usize,
        index: usize,
    },

    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
