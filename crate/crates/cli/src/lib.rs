//! Command line front end and local HTTP service for `tiger-core`.

pub mod cli;
pub mod engine;
pub mod report;
pub mod service;

use std::io;
use std::path::Path;

use thiserror::Error;
use tiger_core::ingest::IngestError;
use tiger_core::model::QualitativeEntry;
use tiger_core::scorecard::{ScenarioError, ScorecardError, Verdict};
use tiger_core::session::SessionError;
use tiger_core::taxonomy::TaxonomyError;

pub use cli::run;

/// Process exit codes. Stable: scripts depend on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Sufficient = 0,
    InputError = 1,
    UsageError = 2,
    NotSufficient = 3,
    Indeterminate = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Sufficient => ExitStatus::Sufficient,
            Verdict::NotSufficient => ExitStatus::NotSufficient,
            Verdict::Indeterminate => ExitStatus::Indeterminate,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Scorecard(#[from] ScorecardError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
    #[error("service: {0}")]
    Serve(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::UsageError,
            _ => ExitStatus::InputError,
        }
    }
}

/// Reads a JSON array of qualitative entries. Parse errors carry the file
/// name, line and column.
pub fn read_qualitative(path: &Path) -> Result<Vec<QualitativeEntry>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}
