//! Pipeline harness: run configuration, artifact layout, provenance
//! manifests, and the command implementations behind the `segue` CLI.
//!
//! A run directory accumulates artifacts stage by stage — `ingest` writes
//! the interned corpus, `split` the two evaluation splits, `build-index`
//! the four co-occurrence indices, `optimize` the tuned weight profile,
//! `evaluate` the metric report, and `recommend`/`submit` the final
//! outputs. Every command stamps a `manifest.json` with the config hash,
//! corpus hash, and binary version.

pub mod config;
pub mod manifest;
pub mod pipeline;

pub use config::{Instantiation, RunConfig};
pub use manifest::Manifest;
pub use pipeline::RunPaths;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: invalid config: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: missing artifact; {hint}")]
    MissingArtifact { path: PathBuf, hint: &'static str },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Index(#[from] crate::cooccur::IndexIoError),
    #[error(transparent)]
    Compose(#[from] crate::compose::ComposeError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error(transparent)]
    Tpe(#[from] tpe::TpeError),
}
