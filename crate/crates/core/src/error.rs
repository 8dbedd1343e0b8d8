use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Schur stable: spectral radius {radius} >= 1 - {margin}")]
    NotSchur { radius: f64, margin: f64 },

    #[error("invalid probability vector: {0}")]
    Probability(String),

    #[error("probability {value} below floor {floor} (probabilities are bounded away from zero)")]
    FloorViolation { value: f64, floor: f64 },

    #[error("value {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("transport problem too large: {size} support points exceeds cap {cap}; project to 1-D and subsample instead")]
    Capacity { size: usize, cap: usize },

    #[error("stationary distribution is not unique: {closed_classes} closed communicating classes")]
    NonUnique { closed_classes: usize },

    #[error("contraction ratio undefined: all sampled state pairs coincide")]
    DegenerateSample,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("csv schema error: {0}")]
    Schema(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
