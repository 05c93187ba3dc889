use thiserror::Error;

use crate::basis::BasisLabel;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: total dimension {requested} exceeds cap {cap}")]
    Dimension { requested: usize, cap: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("rank error: {0}")]
    Rank(String),

    #[error("basis error: {0}")]
    Basis(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("protocol inconsistency for outcome {label} with resource {resource}: {reason}")]
    ProtocolInconsistency {
        label: BasisLabel,
        resource: BasisLabel,
        reason: String,
    },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("verification failure: {0}")]
    Verification(String),

    #[error("EES violation: {0}")]
    EesViolation(String),

    #[error("leakage error: residual {residual:e} exceeds {threshold:e} ({context})")]
    Leakage {
        residual: f64,
        threshold: f64,
        context: String,
    },

    #[error("setup error: {0}")]
    Setup(String),

    #[error("authorization error: {0}")]
    Authorization(String),

    #[error("causality error: {0}")]
    Causality(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
