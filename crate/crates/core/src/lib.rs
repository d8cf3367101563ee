//! Tractable circuit operations, information-theoretic queries, a static
//! tractability analyzer and an exhaustive-enumeration oracle.

pub mod analyzer;
pub mod circuit;
pub mod cli;
pub mod compile;
pub mod error;
pub mod hardness;
pub mod ops;
pub mod oracle;
pub mod queries;

pub use circuit::{Builder, Circuit, InputTable, ScopeSet, Variable};
pub use error::{Error, Result};
