//! Crate-wide error type.

use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (OBO stanza, annotation line, config line, ...).
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An `is_a` target that is not defined anywhere in the document.
    #[error("line {line}: is_a target {accession} is not defined in the document")]
    Reference { line: usize, accession: String },

    /// The ontology is not acyclic; one offending cycle is listed.
    #[error("ontology contains a cycle: {}", cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },

    /// Data or shape validation failure.
    #[error("{0}")]
    Invalid(String),

    /// Training produced a non-finite loss.
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
