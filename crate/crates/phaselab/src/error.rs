use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported group order: {0}")]
    UnsupportedOrder(String),

    #[error("degenerate band overlap: {0}")]
    DegenerateOverlap(String),

    #[error("nonpositive measure weight at label index {0}")]
    NonPositiveWeight(usize),

    #[error("filter bank must contain at least one filter")]
    EmptyBank,

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("undefined input: {0}")]
    UndefinedInput(String),

    #[error("budget exceeded: requires {needed} evaluations, cap is {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },

    #[error("inapplicable bound: {0}")]
    InapplicableBound(String),

    #[error("field not in the reproducing kernel space: relative defect {defect:.3e}")]
    NotInRkhs { defect: f64 },

    #[error("invalid ambiguity spec: {0}")]
    InvalidSpec(String),

    #[error("local phase consistency failure at label `{label}`: residual {residual:.3e}")]
    LocalConsistency { label: String, residual: f64 },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
