use std::fmt;

use crate::diagnostics::DiagnosticRecord;
use crate::solver::SolverState;

/// One violated configuration rule, named after the constraint it breaks.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub rule: String,
    pub detail: String,
}

impl ConstraintViolation {
    pub fn new(rule: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            rule: rule.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule \"{}\" violated: {}", self.rule, self.detail)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("insufficient resolution: spacing {actual:.3e} exceeds required {required:.3e}")]
    Resolution { required: f64, actual: f64 },

    #[error("weight construction failed at x = {x}: {reason}")]
    ConstructionFailure { x: f64, reason: String },

    #[error("unknown name `{0}`")]
    Lookup(String),

    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("solution blew up at t = {t}")]
    BlowUp {
        t: f64,
        last_good: Box<SolverState>,
    },

    #[error("sequencing error: {0}")]
    Sequencing(String),

    #[error("experiment failed: {reason}")]
    ExperimentFailed {
        reason: String,
        partial: Vec<DiagnosticRecord>,
    },

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("snapshot length error: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("configuration rejected:\n{}", list_violations(.0))]
    Constraint(Vec<ConstraintViolation>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

fn list_violations(v: &[ConstraintViolation]) -> String {
    v.iter()
        .map(|c| format!("  - {c}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
