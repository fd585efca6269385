//! Error taxonomy shared by the interpreters, models and solver loops.

use std::fmt;

use thiserror::Error;

/// Coarse classification of a [`SynthError`]; every failure maps to exactly one kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    ExecFailure,
    TypeError,
    RangeViolation,
    NotAPrefix,
    BudgetExhausted,
    ParseError,
    ProtocolError,
}

/// Location and expectation details for a failed parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the parsed text (or line number for record files).
    pub position: usize,
    pub expected: Vec<String>,
    pub message: String,
}

impl ParseError {
    pub fn new(position: usize, expected: &[&str], message: impl Into<String>) -> Self {
        ParseError {
            position,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: {}", self.position, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SynthError {
    #[error("execution failure: {0}")]
    ExecFailure(String),
    #[error("type error: {0}")]
    TypeError(String),
    #[error("range violation: {0}")]
    RangeViolation(String),
    #[error("not a prefix: {0}")]
    NotAPrefix(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("parse error {0}")]
    Parse(ParseError),
    #[error("protocol error: {0}")]
    ProtocolError(String),
}

impl SynthError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            SynthError::ExecFailure(_) => ErrorKind::ExecFailure,
            SynthError::TypeError(_) => ErrorKind::TypeError,
            SynthError::RangeViolation(_) => ErrorKind::RangeViolation,
            SynthError::NotAPrefix(_) => ErrorKind::NotAPrefix,
            SynthError::BudgetExhausted(_) => ErrorKind::BudgetExhausted,
            SynthError::Parse(_) => ErrorKind::ParseError,
            SynthError::ProtocolError(_) => ErrorKind::ProtocolError,
        }
    }

    pub(crate) fn exec(msg: impl Into<String>) -> Self {
        SynthError::ExecFailure(msg.into())
    }

    pub(crate) fn parse(position: usize, expected: &[&str], msg: impl Into<String>) -> Self {
        SynthError::Parse(ParseError::new(position, expected, msg))
    }
}

impl From<ParseError> for SynthError {
    fn from(e: ParseError) -> Self {
        SynthError::Parse(e)
    }
}

pub type Result<T, E = SynthError> = std::result::Result<T, E>;
