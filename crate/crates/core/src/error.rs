//! Error type shared by every module.

use thiserror::Error;

/// Structural property names used in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Smooth,
    Decomposable,
    Structured,
    Deterministic,
    Compatible,
    Linear,
    PcMode,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Smooth => "smooth",
            Property::Decomposable => "decomposable",
            Property::Structured => "structured-decomposable",
            Property::Deterministic => "deterministic",
            Property::Compatible => "compatible",
            Property::Linear => "linear",
            Property::PcMode => "pc-mode",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("property violation ({}): {detail}{}", property.name(), citation_suffix(.citation))]
    PropertyViolation { property: Property, unit: Option<usize>, detail: String, citation: Option<String> },

    #[error("scope error: {0}")]
    ScopeError(String),

    #[error("enumeration budget exceeded: {states} states > budget {budget}")]
    BudgetExceeded { states: u128, budget: u64 },

    #[error("rearrangement failure at units ({p_unit}, {q_unit}): {detail}{}", citation_suffix(.citation))]
    RearrangementFailure { p_unit: usize, q_unit: usize, detail: String, citation: Option<String> },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergence undefined: {0}")]
    DivergenceUndefined(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unknown operation `{0}`")]
    UnknownOperation(String),

    #[error("arity error: {0}")]
    Arity(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn citation_suffix(c: &Option<String>) -> String {
    match c {
        Some(c) => format!(" [{c}]"),
        None => String::new(),
    }
}

impl Error {
    pub fn violation(property: Property, unit: Option<usize>, detail: impl Into<String>) -> Self {
        Error::PropertyViolation { property, unit, detail: detail.into(), citation: None }
    }

    /// Attaches a hardness citation to refusals that do not carry one yet.
    pub fn cite(self, citation: &str) -> Self {
        match self {
            Error::PropertyViolation { property, unit, detail, citation: None } => {
                Error::PropertyViolation { property, unit, detail, citation: Some(citation.to_string()) }
            }
            Error::RearrangementFailure { p_unit, q_unit, detail, citation: None } => {
                Error::RearrangementFailure { p_unit, q_unit, detail, citation: Some(citation.to_string()) }
            }
            other => other,
        }
    }

    /// Replaces any citation, used when a query-level row supersedes an operation row.
    pub fn recite(self, citation: &str) -> Self {
        match self {
            Error::PropertyViolation { property, unit, detail, .. } => {
                Error::PropertyViolation { property, unit, detail, citation: Some(citation.to_string()) }
            }
            Error::RearrangementFailure { p_unit, q_unit, detail, .. } => {
                Error::RearrangementFailure { p_unit, q_unit, detail, citation: Some(citation.to_string()) }
            }
            other => other,
        }
    }

    pub fn citation(&self) -> Option<&str> {
        match self {
            Error::PropertyViolation { citation, .. } | Error::RearrangementFailure { citation, .. } => {
                citation.as_deref()
            }
            _ => None,
        }
    }

    /// True for refusals on mathematical grounds (exit code 2 in the CLI).
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::PropertyViolation { .. } | Error::RearrangementFailure { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAssignment(_) => "InvalidAssignment",
            Error::PropertyViolation { .. } => "PropertyViolation",
            Error::ScopeError(_) => "ScopeError",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::RearrangementFailure { .. } => "RearrangementFailure",
            Error::DomainError(_) => "DomainError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::DivergenceUndefined(_) => "DivergenceUndefined",
            Error::Parse { .. } => "ParseError",
            Error::UnknownOperation(_) => "UnknownOperation",
            Error::Arity(_) => "ArityError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
