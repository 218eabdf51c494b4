use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("not a pseudo-polynomial: every exponent is an integer")]
    AllExponentsIntegral,

    #[error("invalid term `{term}`: {reason}")]
    InvalidTerm { term: String, reason: String },

    #[error("precision cap of {cap} bits reached without meeting the error bound")]
    PrecisionExceeded { cap: u32 },

    #[error("ambiguous floor at n = {n}: enclosure straddles an integer at {bits} bits")]
    AmbiguousFloor { n: u64, bits: u32 },

    #[error("invalid range ({lo}, {hi}]: {reason}")]
    InvalidRange { lo: u64, hi: u64, reason: String },

    #[error("range ({lo}, {hi}] exceeds the sieve memory budget of {budget} candidates")]
    RangeTooLarge { lo: u64, hi: u64, budget: u64 },

    #[error("coefficient bound violated: |{sequence}_{index}| = {magnitude} > {bound}")]
    CoefficientBound {
        sequence: &'static str,
        index: u64,
        magnitude: f64,
        bound: u64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not enough usable data points: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
