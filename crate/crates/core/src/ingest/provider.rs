use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{DatasetBundle, IngestError, REQUIRED_FILES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderCapabilities {
    /// Bundle files the provider can produce.
    pub tables: Vec<String>,
}

/// A source of dataset snapshots. Fetching never mutates the source, and
/// the same `(dao_id, at)` always yields the same bundle.
pub trait SnapshotProvider: Send + Sync {
    fn capabilities(&self) -> ProviderCapabilities;

    fn fetch(&self, dao_id: &str, at: DateTime<Utc>) -> Result<DatasetBundle, IngestError>;
}

/// Serves one fixed bundle for every request.
#[derive(Debug, Clone)]
pub struct MockProvider {
    bundle: DatasetBundle,
}

impl MockProvider {
    pub fn new(bundle: DatasetBundle) -> Self {
        MockProvider { bundle }
    }
}

impl SnapshotProvider for MockProvider {
    fn capabilities(&self) -> ProviderCapabilities {
        ProviderCapabilities { tables: self.bundle.files.keys().cloned().collect() }
    }

    fn fetch(&self, _dao_id: &str, _at: DateTime<Utc>) -> Result<DatasetBundle, IngestError> {
        if let Some(missing) = REQUIRED_FILES.iter().find(|f| !self.bundle.files.contains_key(**f)) {
            return Err(IngestError::MissingFile(missing.to_string()));
        }
        Ok(self.bundle.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_bundle, render_bundle, LoadOptions};
    use crate::testutil::bare_dataset;

    #[test]
    fn fetch_is_idempotent() {
        let p = MockProvider::new(render_bundle(&bare_dataset()));
        let a = p.fetch("dao", DateTime::UNIX_EPOCH).unwrap();
        let b = p.fetch("dao", Utc::now()).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(load_bundle(&a, LoadOptions::default()).unwrap().dataset, bare_dataset());
        assert!(p.capabilities().tables.contains(&"votes.csv".to_string()));
    }
}
