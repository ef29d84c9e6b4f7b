use std::fmt;

use thiserror::Error;

/// One broken network invariant. Violations are collected, not thrown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub message: String,
}

impl Violation {
    pub(crate) fn new(message: impl Into<String>) -> Self {
        Self { message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("invalid network: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("bus {0} not found")]
    BusNotFound(u32),

    #[error("branch {from}-{to} not found")]
    BranchNotFound { from: u32, to: u32 },

    #[error("singular jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("invalid strategy `{token}`: {message}")]
    InvalidStrategy { token: String, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid control: {0}")]
    InvalidControl(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
