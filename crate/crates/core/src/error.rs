//! Validation errors shared by every constructor in the crate.
//!
//! Each error carries a field path (`observers[2].importance`,
//! `params.beta`, ...) so callers can point users at the offending input.
//! Paths are built bottom-up: a constructor reports the local field name and
//! the caller prefixes it with [`ValidationError::within`].

use std::fmt;

/// What went wrong with a field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationKind {
    #[error("value {value} outside permitted range {range}")]
    OutOfRange { value: f64, range: &'static str },
    #[error("duplicate observer id '{0}'")]
    DuplicateObserver(String),
    #[error("{0}")]
    Invalid(String),
}

/// A validation failure at a specific field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError {
    path: String,
    kind: ValidationKind,
}

impl ValidationError {
    pub fn new(path: impl Into<String>, kind: ValidationKind) -> Self {
        Self {
            path: path.into(),
            kind,
        }
    }

    pub fn out_of_range(path: impl Into<String>, value: f64, range: &'static str) -> Self {
        Self::new(path, ValidationKind::OutOfRange { value, range })
    }

    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(path, ValidationKind::Invalid(message.into()))
    }

    /// Prefixes the path with an enclosing field, e.g. `importance` within
    /// `observers[0]` becomes `observers[0].importance`.
    pub fn within(mut self, parent: &str) -> Self {
        self.path = join_path(parent, &self.path);
        self
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn kind(&self) -> &ValidationKind {
        &self.kind
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}: {}", self.path, self.kind)
        }
    }
}

impl std::error::Error for ValidationError {}

pub(crate) fn join_path(parent: &str, child: &str) -> String {
    match (parent.is_empty(), child.is_empty()) {
        (true, _) => child.to_string(),
        (_, true) => parent.to_string(),
        _ if child.starts_with('[') => format!("{parent}{child}"),
        _ => format!("{parent}.{child}"),
    }
}

/// Checks `lo <= value <= hi`, rejecting NaN.
pub(crate) fn check_closed(
    path: &str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<f64, ValidationError> {
    if value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(ValidationError::out_of_range(path, value, range))
    }
}

/// Checks `value >= 0` and finite.
pub(crate) fn check_non_negative(path: &str, value: f64) -> Result<f64, ValidationError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ValidationError::out_of_range(path, value, "[0, inf)"))
    }
}
