//! Protein function prediction over the Gene Ontology hierarchy.
//!
//! The pipeline combines fixed, externally computed protein sequence
//! embeddings with a graph-convolutional representation of the GO DAG:
//!
//! 1. [`ontology`] parses an OBO file into an indexed `is_a` DAG.
//! 2. [`annotations`] filters experimental evidence and propagates
//!    annotations with the true path rule.
//! 3. [`go_features`] derives term frequencies, information content, the
//!    IC-weighted adjacency matrix, and ancestor one-hot node features.
//! 4. [`model`] trains the term-embedding + GCN + sequence-projection
//!    network with exact analytic gradients and Adam.
//! 5. [`metrics`] scores predictions with the protein-centric Fmax sweep
//!    and micro/macro AUPR.
//!
//! Every capability has a runnable demo under `examples/`; the `ontopred`
//! binary exposes the same pipeline as subcommands (see [`cli`]).

pub mod annotations;
pub mod cli;
pub mod embeddings;
pub mod error;
pub mod go_features;
pub mod metrics;
pub mod model;
pub mod ontology;
pub mod pipeline;
pub mod sparse;
pub mod synth;

pub use error::{Error, Result};
