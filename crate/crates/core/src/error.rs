use thiserror::Error;

use crate::quiver::ValidationIssue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid quiver or label: {}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("dbar constraint inconsistent at vertex `{vertex}`: {detail}")]
    Inconsistent { vertex: String, detail: String },

    #[error("slope undefined for zero total rank")]
    UndefinedSlope,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
