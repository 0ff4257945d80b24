use std::path::PathBuf;

/// Errors produced by loaders, estimators, and analysis drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed row: {msg}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: unexpected header, expected {expected}")]
    BadHeader { path: PathBuf, expected: String },

    #[error("{path}: no data rows")]
    NoDataRows { path: PathBuf },

    #[error("duplicate date {date} in {context}")]
    DuplicateDate { date: String, context: String },

    #[error("non-finite value for {field} on {date}")]
    NonFinite { field: String, date: String },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("empty intersection of dates between {left} and {right}")]
    EmptyIntersection { left: String, right: String },

    #[error("resulting panel empty")]
    EmptyPanel,

    #[error("insufficient rows: n={n}, k={k}")]
    InsufficientRows { n: usize, k: usize },

    #[error("insufficient estimation rows: need {needed}, have {available}")]
    InsufficientEstimationRows { needed: usize, available: usize },

    #[error("rank deficiency: column `{column}` is linearly dependent on preceding columns")]
    RankDeficient { column: String },

    #[error("missing regressor `{0}`")]
    MissingRegressor(String),

    #[error("unknown asset `{0}`")]
    UnknownAsset(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero cross-sectional variance")]
    ZeroCrossSectionalVariance,

    #[error("insufficient placebo candidates: requested {requested}, pool has {available}")]
    InsufficientCandidates { requested: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
