use std::fmt;

use thiserror::Error;

/// A single out-of-range or inconsistent setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamIssue {
    pub key: String,
    pub message: String,
}

impl ParamIssue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ParamIssue {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParamIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

fn join(issues: &[ParamIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<ParamIssue>),

    #[error("trapping index must be >= 1, got {0}")]
    InvalidTrappingIndex(i64),

    #[error("invalid injection schedule: {0}")]
    InvalidSchedule(String),

    #[error("simulation horizon must be positive, got {0}")]
    InvalidHorizon(f64),

    #[error("chain has {} closed classes {:?}; declare which support to use", .0.len(), .0)]
    ReducibleChain(Vec<Vec<usize>>),

    #[error("declared support {0:?} is not a closed class of the chain")]
    InvalidSupport(Vec<usize>),

    #[error("excluded set must leave at least one state and exclude at least one")]
    InvalidExclusion,

    #[error("eigen-solve did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("stationary residual {0:e} exceeds tolerance")]
    Residual(f64),
}
