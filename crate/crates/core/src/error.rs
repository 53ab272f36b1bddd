use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("signal length {0} is not a power of two")]
    NonDyadicLength(usize),

    #[error("coarse level {j0} must satisfy 0 <= j0 < J = {max_level}")]
    BadLevelRange { j0: usize, max_level: usize },

    #[error("malformed coefficient pyramid: {0}")]
    MalformedPyramid(String),

    #[error("parameter out of model range: {0}")]
    OutOfModelRange(String),

    #[error("degenerate series: zero denominator in lag-1 estimate")]
    DegenerateSeries,

    #[error("rho = {0} is not in the open interval (-1, 1)")]
    NonStationaryRho(f64),

    #[error("FANOVA decomposition needs at least two curves, got {0}")]
    NeedTwoCurves(usize),

    #[error("noise level eta = {0} too large for the adaptive threshold (need eta < e^(-1/2))")]
    EtaOutOfRange(f64),

    #[error("signal has zero variance")]
    ZeroVariance,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("input error: {0}")]
    Input(String),
}
