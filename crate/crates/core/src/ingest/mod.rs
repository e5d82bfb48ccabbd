//! On-disk dataset bundles and snapshot providers.
//!
//! A bundle is a directory of flat files: CSV for tables, JSON Lines for
//! proposals and JSON for nested structures. Rendering is canonical, so
//! loading and saving a canonical bundle reproduces it byte for byte.

mod provider;
mod tables;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use provider::{MockProvider, ProviderCapabilities, SnapshotProvider};

use crate::model::{validate_dataset, GovernanceDataset, ValidationReport};

pub const BALANCES: &str = "balances.csv";
pub const DELEGATIONS: &str = "delegations.csv";
pub const PROPOSALS: &str = "proposals.jsonl";
pub const VOTES: &str = "votes.csv";
pub const ALLOCATION: &str = "allocation.json";
pub const PARAMS: &str = "params.json";
pub const CAPABILITIES: &str = "capabilities.json";
pub const AGENTS: &str = "agents.csv";
pub const META: &str = "meta.json";

/// Files that must be present, in load order.
pub const REQUIRED_FILES: [&str; 8] = [META, BALANCES, DELEGATIONS, PROPOSALS, VOTES, ALLOCATION, PARAMS, CAPABILITIES];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing file: {0}")]
    MissingFile(String),
    #[error("{}: {message}", location(.file, *.line, *.column))]
    Malformed {
        file: String,
        line: u64,
        column: Option<usize>,
        message: String,
    },
    #[error("dataset failed validation with {} violation(s)", .0.violations.len())]
    Invalid(ValidationReport),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

fn location(file: &str, line: u64, column: Option<usize>) -> String {
    match column {
        Some(c) => format!("{file}:{line}:{c}"),
        None => format!("{file}:{line}"),
    }
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        IngestError::Io { path: path.display().to_string(), source }
    }
}

/// The raw files of a dataset, keyed by file name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetBundle {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl DatasetBundle {
    pub fn read_dir(dir: &Path) -> Result<Self, IngestError> {
        let mut files = BTreeMap::new();
        for name in REQUIRED_FILES.iter().chain([&AGENTS]) {
            let path = dir.join(name);
            match fs::read(&path) {
                Ok(bytes) => {
                    files.insert(name.to_string(), bytes);
                }
                Err(e) if e.kind() == io::ErrorKind::NotFound => {
                    if *name != AGENTS {
                        return Err(IngestError::MissingFile(name.to_string()));
                    }
                }
                Err(e) => return Err(IngestError::io(&path, e)),
            }
        }
        Ok(DatasetBundle { files })
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), IngestError> {
        fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| IngestError::io(&path, e))?;
        }
        Ok(())
    }

    fn get(&self, name: &str) -> Result<&[u8], IngestError> {
        self.files
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| IngestError::MissingFile(name.to_string()))
    }

    /// sha256 over every file, framed by name and length.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for (name, bytes) in &self.files {
            h.update(name.as_bytes());
            h.update(b"\n");
            h.update(bytes.len().to_string().as_bytes());
            h.update(b"\n");
            h.update(bytes);
        }
        hex::encode(h.finalize())
    }
}

fn parse_json<T: DeserializeOwned>(file: &str, data: &[u8]) -> Result<T, IngestError> {
    serde_json::from_slice(data).map_err(|e| IngestError::Malformed {
        file: file.to_string(),
        line: e.line() as u64,
        column: Some(e.column()),
        message: e.to_string(),
    })
}

fn render_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("model types serialize");
    out.push(b'\n');
    out
}

/// Canonical file set for a dataset. `agents.csv` is always included.
pub fn render_bundle(ds: &GovernanceDataset) -> DatasetBundle {
    let files = [
        (META, render_json(&ds.meta)),
        (BALANCES, tables::render_balances(&ds.balances)),
        (DELEGATIONS, tables::render_delegations(&ds.delegations)),
        (PROPOSALS, tables::render_proposals(&ds.proposals)),
        (VOTES, tables::render_votes(&ds.votes)),
        (ALLOCATION, render_json(&ds.allocation)),
        (PARAMS, render_json(&ds.params)),
        (CAPABILITIES, render_json(&ds.capabilities)),
        (AGENTS, tables::render_agents(&ds.agent_evidence)),
    ];
    DatasetBundle { files: files.into_iter().map(|(n, b)| (n.to_string(), b)).collect() }
}

/// Parses every file; the first file-level error wins.
pub fn parse_bundle(bundle: &DatasetBundle) -> Result<GovernanceDataset, IngestError> {
    Ok(GovernanceDataset {
        meta: parse_json(META, bundle.get(META)?)?,
        balances: tables::parse_balances(BALANCES, bundle.get(BALANCES)?)?,
        delegations: tables::parse_delegations(DELEGATIONS, bundle.get(DELEGATIONS)?)?,
        proposals: tables::parse_proposals(PROPOSALS, bundle.get(PROPOSALS)?)?,
        votes: tables::parse_votes(VOTES, bundle.get(VOTES)?)?,
        allocation: parse_json(ALLOCATION, bundle.get(ALLOCATION)?)?,
        params: parse_json(PARAMS, bundle.get(PARAMS)?)?,
        capabilities: parse_json(CAPABILITIES, bundle.get(CAPABILITIES)?)?,
        agent_evidence: match bundle.files.get(AGENTS) {
            Some(data) => tables::parse_agents(AGENTS, data)?,
            None => Vec::new(),
        },
    })
}

/// Content hash of a dataset's canonical rendering. Independent of how the
/// source files were formatted.
pub fn dataset_hash(ds: &GovernanceDataset) -> String {
    render_bundle(ds).content_hash()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Turn cross-file validation warnings into an error.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub dataset: GovernanceDataset,
    pub warnings: ValidationReport,
    pub content_hash: String,
}

pub fn load_bundle(bundle: &DatasetBundle, options: LoadOptions) -> Result<LoadedDataset, IngestError> {
    let dataset = parse_bundle(bundle)?;
    let warnings = validate_dataset(&dataset);
    if options.strict && !warnings.is_empty() {
        return Err(IngestError::Invalid(warnings));
    }
    let content_hash = dataset_hash(&dataset);
    Ok(LoadedDataset { dataset, warnings, content_hash })
}

pub fn load_dataset(dir: &Path, options: LoadOptions) -> Result<LoadedDataset, IngestError> {
    load_bundle(&DatasetBundle::read_dir(dir)?, options)
}

/// Writes the canonical rendering of `ds` and returns its content hash.
pub fn save_dataset(ds: &GovernanceDataset, dir: &Path) -> Result<String, IngestError> {
    let bundle = render_bundle(ds);
    bundle.write_dir(dir)?;
    Ok(bundle.content_hash())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::bare_dataset;

    #[test]
    fn missing_votes_file() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&bare_dataset(), dir.path()).unwrap();
        fs::remove_file(dir.path().join(VOTES)).unwrap();
        let err = load_dataset(dir.path(), LoadOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "missing file: votes.csv");
    }

    #[test]
    fn agents_file_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let hash = save_dataset(&bare_dataset(), dir.path()).unwrap();
        fs::remove_file(dir.path().join(AGENTS)).unwrap();
        let loaded = load_dataset(dir.path(), LoadOptions::default()).unwrap();
        assert_eq!(loaded.dataset, bare_dataset());
        assert_eq!(loaded.content_hash, hash);
    }

    #[test]
    fn strict_mode_rejects_violations() {
        let mut ds = bare_dataset();
        ds.params.quorum = crate::model::TokenAmount::ZERO;
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let lenient = load_dataset(dir.path(), LoadOptions { strict: false }).unwrap();
        assert!(lenient.warnings.rules().contains("quorum-not-positive"));
        assert!(matches!(load_dataset(dir.path(), LoadOptions { strict: true }), Err(IngestError::Invalid(_))));
    }

    #[test]
    fn malformed_json_has_location() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&bare_dataset(), dir.path()).unwrap();
        fs::write(dir.path().join(PARAMS), "{\n  \"quorum\": 5\n}\n").unwrap();
        let err = load_dataset(dir.path(), LoadOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("params.json:"), "{err}");
    }

    #[test]
    fn save_load_save_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let first = save_dataset(&bare_dataset(), dir.path()).unwrap();
        let loaded = load_dataset(dir.path(), LoadOptions::default()).unwrap();
        let second = save_dataset(&loaded.dataset, dir.path()).unwrap();
        assert_eq!(first, second);
        assert_eq!(loaded.content_hash, first);
    }
}
