use thiserror::Error;

use crate::optimize::RunTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain {domain}")]
    Domain { point: Vec<f64>, domain: String },

    #[error("coefficients are bound to basis {found:#x}, expected {expected:#x}")]
    Binding { expected: u64, found: u64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("unsupported operation: {0}")]
    Capability(String),

    #[error("invalid value for `{key}`: {message}")]
    InvalidConfig { key: String, message: String },

    #[error("non-finite value while evaluating {what} at node {node}")]
    NonFinite { what: &'static str, node: usize },

    #[error("iterate diverged at iteration {iteration} (lambda = {lambda:?})")]
    Diverged {
        iteration: usize,
        lambda: Vec<f64>,
        partial: Option<Box<RunTrace>>,
    },

    #[error("cannot construct {what}: {message}")]
    Construction { what: &'static str, message: String },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("ground truth residual {residual:e} exceeds {tolerance:e} at node {node} (lambda = {lambda:?})")]
    Residual {
        node: usize,
        lambda: Vec<f64>,
        residual: f64,
        tolerance: f64,
    },

    #[error(
        "quadrature rule integrates degree {available} exactly, degree {required} is required"
    )]
    Exactness { required: usize, available: usize },

    #[error("matrix is singular or indefinite: {0}")]
    Conditioning(String),

    #[error("invalid discretization schedule: {0}")]
    Schedule(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("audit unavailable: {0}")]
    AuditUnavailable(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Diverged { .. })
    }
}
