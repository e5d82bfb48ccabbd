//! Assessment sessions: an append-only log of assessor inputs over one
//! dataset. The current state is whatever replaying the log produces.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingest::IngestError;
use crate::model::{Address, GovernanceDataset, ModelError, QualitativeEntry};
use crate::scorecard::{assess, Assessment, CalibrationProfile, MetricSnapshot, ScenarioSpec, ScorecardError};
use crate::taxonomy::AgentClass;

pub const SESSION_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    AddQualitative { entry: QualitativeEntry },
    /// `class: None` clears an earlier override.
    OverrideAgent { address: Address, class: Option<AgentClass> },
    PushScenario { spec: ScenarioSpec },
    RemoveScenario { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub mutation: Mutation,
}

/// Inputs reconstructed from the log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub qualitative: Vec<QualitativeEntry>,
    pub overrides: BTreeMap<Address, AgentClass>,
    pub scenarios: Vec<ScenarioSpec>,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("audit entry {seq}: {message}")]
    InvalidMutation { seq: u64, message: String },
    #[error("audit log out of order at entry {0}")]
    OutOfOrder(u64),
    #[error("unsupported session format {0}")]
    UnsupportedFormat(u32),
    #[error("session expects dataset {expected}, found {found}")]
    DatasetMismatch { expected: String, found: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Scorecard(#[from] ScorecardError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentSession {
    pub format: u32,
    pub dataset_hash: String,
    /// Where the dataset was loaded from; informational.
    pub dataset_path: Option<String>,
    pub calibration_id: String,
    pub created_at: DateTime<Utc>,
    pub log: Vec<AuditEntry>,
}

fn apply_one(state: &mut SessionState, mutation: &Mutation) -> Result<(), String> {
    match mutation {
        Mutation::AddQualitative { entry } => {
            entry.validate().map_err(|e: ModelError| e.to_string())?;
            state.qualitative.push(entry.clone());
        }
        Mutation::OverrideAgent { address, class: Some(c) } => {
            state.overrides.insert(address.clone(), *c);
        }
        Mutation::OverrideAgent { address, class: None } => {
            if state.overrides.remove(address).is_none() {
                return Err(format!("no override to clear for {address}"));
            }
        }
        Mutation::PushScenario { spec } => state.scenarios.push(spec.clone()),
        Mutation::RemoveScenario { index } => {
            if *index >= state.scenarios.len() {
                return Err(format!("no scenario at index {index}"));
            }
            state.scenarios.remove(*index);
        }
    }
    Ok(())
}

impl AssessmentSession {
    pub fn new(
        dataset_hash: impl Into<String>,
        dataset_path: Option<String>,
        calibration_id: impl Into<String>,
        created_at: DateTime<Utc>,
    ) -> Self {
        AssessmentSession {
            format: SESSION_FORMAT,
            dataset_hash: dataset_hash.into(),
            dataset_path,
            calibration_id: calibration_id.into(),
            created_at,
            log: Vec::new(),
        }
    }

    /// Sequence number of the last committed mutation; 0 for a fresh session.
    pub fn seq(&self) -> u64 {
        self.log.last().map_or(0, |e| e.seq)
    }

    pub fn replay(&self) -> Result<SessionState, SessionError> {
        let mut state = SessionState::default();
        let mut prev: Option<&AuditEntry> = None;
        for e in &self.log {
            let expected = prev.map_or(1, |p| p.seq + 1);
            if e.seq != expected || prev.is_some_and(|p| e.at < p.at) {
                return Err(SessionError::OutOfOrder(e.seq));
            }
            apply_one(&mut state, &e.mutation)
                .map_err(|message| SessionError::InvalidMutation { seq: e.seq, message })?;
            prev = Some(e);
        }
        Ok(state)
    }

    /// A copy of this session with `mutation` appended. The receiver is left
    /// untouched, so callers can check the result before committing it.
    /// Timestamps earlier than the last entry are clamped to keep the log
    /// ordered.
    pub fn with_mutation(&self, mutation: Mutation, at: DateTime<Utc>) -> Result<AssessmentSession, SessionError> {
        let mut next = self.clone();
        let at = self.log.last().map_or(at, |l| at.max(l.at));
        next.log.push(AuditEntry { seq: self.seq() + 1, at, mutation });
        next.replay()?;
        Ok(next)
    }

    pub fn to_canonical_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("session serializes");
        out.push(b'\n');
        out
    }

    pub fn content_hash(&self) -> String {
        hash_bytes(&self.to_canonical_json())
    }

    pub fn check_dataset(&self, dataset_hash: &str) -> Result<(), SessionError> {
        if self.dataset_hash != dataset_hash {
            return Err(SessionError::DatasetMismatch {
                expected: self.dataset_hash.clone(),
                found: dataset_hash.to_string(),
            });
        }
        Ok(())
    }

    /// Replays the log and runs the whole assessment pipeline.
    pub fn assess(
        &self,
        dataset: &GovernanceDataset,
        calibration: &CalibrationProfile,
    ) -> Result<(MetricSnapshot, Assessment), SessionError> {
        let state = self.replay()?;
        Ok(assess(dataset, &state.overrides, &state.scenarios, &state.qualitative, calibration)?)
    }
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Persists the session and returns the hash of the written bytes.
pub fn save_session(session: &AssessmentSession, path: &Path) -> Result<String, SessionError> {
    session.replay()?;
    let bytes = session.to_canonical_json();
    fs::write(path, &bytes).map_err(|e| IngestError::io(path, e))?;
    Ok(hash_bytes(&bytes))
}

/// Loads a session and checks that its log replays. Returns the session and
/// the hash of the file as read.
pub fn load_session(path: &Path) -> Result<(AssessmentSession, String), SessionError> {
    let bytes = fs::read(path).map_err(|e| IngestError::io(path, e))?;
    let session: AssessmentSession = serde_json::from_slice(&bytes).map_err(|e| SessionError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if session.format != SESSION_FORMAT {
        return Err(SessionError::UnsupportedFormat(session.format));
    }
    session.replay()?;
    Ok((session, hash_bytes(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CharacteristicId;
    use crate::testutil::addr;
    use chrono::Duration;

    fn t0() -> DateTime<Utc> {
        DateTime::UNIX_EPOCH
    }

    fn fresh() -> AssessmentSession {
        AssessmentSession::new("abc", None, "paper-2022", t0())
    }

    fn qualitative(score: u8) -> Mutation {
        Mutation::AddQualitative {
            entry: QualitativeEntry {
                characteristic: CharacteristicId::SoftPower,
                score,
                evidence: "forum activity".into(),
                assessor: "a".into(),
                entered_at: t0(),
            },
        }
    }

    #[test]
    fn hashes_are_content_addressed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let s = fresh();
        let h1 = save_session(&s, &p).unwrap();
        let h2 = save_session(&s, &p).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1, s.content_hash());
        let s2 = s.with_mutation(qualitative(3), t0()).unwrap();
        assert_ne!(save_session(&s2, &p).unwrap(), h1);
        let (loaded, h) = load_session(&p).unwrap();
        assert_eq!(loaded, s2);
        assert_eq!(h, s2.content_hash());
    }

    #[test]
    fn invalid_mutations_are_rejected() {
        let s = fresh();
        assert!(matches!(s.with_mutation(qualitative(6), t0()), Err(SessionError::InvalidMutation { .. })));
        assert!(s.with_mutation(Mutation::RemoveScenario { index: 0 }, t0()).is_err());
        assert!(s
            .with_mutation(Mutation::OverrideAgent { address: addr(1), class: None }, t0())
            .is_err());
        assert!(s.log.is_empty());
    }

    #[test]
    fn replay_tracks_overrides_and_scenarios() {
        let s = fresh()
            .with_mutation(Mutation::OverrideAgent { address: addr(1), class: Some(AgentClass::Via) }, t0())
            .unwrap()
            .with_mutation(Mutation::PushScenario { spec: ScenarioSpec::VestingComplete }, t0())
            .unwrap();
        let state = s.replay().unwrap();
        assert_eq!(state.overrides[&addr(1)], AgentClass::Via);
        assert_eq!(state.scenarios.len(), 1);
        let s = s
            .with_mutation(Mutation::RemoveScenario { index: 0 }, t0())
            .unwrap()
            .with_mutation(Mutation::OverrideAgent { address: addr(1), class: None }, t0())
            .unwrap();
        assert_eq!(s.replay().unwrap(), SessionState::default());
        assert_eq!(s.seq(), 4);
    }

    #[test]
    fn timestamps_never_go_backwards() {
        let later = t0() + Duration::days(1);
        let s = fresh().with_mutation(qualitative(3), later).unwrap().with_mutation(qualitative(4), t0()).unwrap();
        assert_eq!(s.log[1].at, later);
    }

    #[test]
    fn tampered_log_fails_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let s = fresh().with_mutation(qualitative(3), t0()).unwrap();
        save_session(&s, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap().replace("\"seq\": 1", "\"seq\": 2");
        fs::write(&p, text).unwrap();
        assert!(matches!(load_session(&p), Err(SessionError::OutOfOrder(2))));
    }
}
