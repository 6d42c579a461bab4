use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol {0:?}: words are over the alphabet {{0,1}}")]
    InvalidSymbol(char),
    #[error("words must have length at least 1")]
    EmptyWord,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("window [{a}, {b}] is empty")]
    EmptyWindow { a: i64, b: i64 },
    #[error("rotation symbol at index {index} lies within rounding distance of an interval endpoint")]
    EndpointAmbiguity { index: i64 },
    #[error("index {index} lies outside the central block [{lo}, {hi})")]
    OutsideCentralBlock { index: i64, lo: i64, hi: i64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("factor {0} has no follower")]
    DeadEnd(String),
    #[error("no occurrence of {0} inside the search window")]
    NoOccurrence(String),
    #[error("weight function has no eventually periodic structure")]
    NotPeriodic,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("coupling LP is infeasible: the measures violate consistency")]
    Infeasible,
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
