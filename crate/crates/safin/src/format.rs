//! Diagnostics shared by the file readers.

use std::fmt;

/// A malformed input file, located by line and field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct FormatError {
    pub line: u64,
    pub field: Option<String>,
    pub message: String,
}

impl FormatError {
    pub fn new(line: u64, message: impl Into<String>) -> Self {
        Self { line, field: None, message: message.into() }
    }

    pub fn field(line: u64, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { line, field: Some(field.into()), message: message.into() }
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "line {}, field `{}`: {}", self.line, field, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

/// Parse a finite float, naming the field on failure.
pub fn parse_f64(s: &str, line: u64, field: &str) -> Result<f64, FormatError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(FormatError::field(line, field, format!("non-finite value `{s}`"))),
        Err(_) => Err(FormatError::field(line, field, format!("not a number: `{s}`"))),
    }
}

pub(crate) fn csv_line(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

pub(crate) fn csv_error(e: csv::Error) -> FormatError {
    FormatError::new(csv_line(&e), e.to_string())
}
