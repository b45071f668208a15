use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("enumeration oracle too large: {size} points exceeds cap {cap}")]
    OracleTooLarge { size: f64, cap: u64 },
    #[error("enumeration oracle unsupported: {0}")]
    OracleUnsupported(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable {0} is not basic")]
    NotBasic(usize),
    #[error("no basis information available (LP status {0})")]
    NoBasis(String),
    #[error("integer optimum unavailable: {0}")]
    ZipUnavailable(String),
    #[error("constraint mask selects no rows")]
    EmptyMask,
    #[error("CG-MIP solution outside model bounds: {0}")]
    ModelCorruption(String),
    #[error("initial integrality gap is zero")]
    GapZero,
    #[error("feature construction failed: {0}")]
    Feature(String),
    #[error("feature statistics: {0}")]
    Stats(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training labels contain a single class: {0}")]
    DegenerateLabels(String),
    #[error("threshold tuning: {0}")]
    Threshold(String),
    #[error("metrics: {0}")]
    Metrics(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid generator spec: {0}")]
    GenSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
