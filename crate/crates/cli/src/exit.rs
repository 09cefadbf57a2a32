//! Process exit codes and the error type that carries them.

use std::fmt;

use jcl_core::JclError;

pub const CONFIG: u8 = 1;
pub const NUMERICAL: u8 = 2;
pub const ASSERTION: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { code: CONFIG, error: error.into() }
    }

    pub fn numerical(error: impl Into<anyhow::Error>) -> Self {
        Self { code: NUMERICAL, error: error.into() }
    }

    pub fn assertion(error: impl Into<anyhow::Error>) -> Self {
        Self { code: ASSERTION, error: error.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

/// Invalid parameters are configuration errors; everything else the engine
/// raises is numerical.
pub fn code_of(e: &JclError) -> u8 {
    match e {
        JclError::NonPositiveOmega { .. }
        | JclError::NonPositiveSpacing { .. }
        | JclError::ZeroCutoff { .. }
        | JclError::NonFinite { .. }
        | JclError::OutOfRange { .. } => CONFIG,
        _ => NUMERICAL,
    }
}

impl From<JclError> for Failure {
    fn from(e: JclError) -> Self {
        Self { code: code_of(&e), error: e.into() }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
