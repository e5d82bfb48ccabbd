//! The single evaluation path shared by the command line and the service.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use tiger_core::ingest::{load_dataset, LoadOptions, LoadedDataset};
use tiger_core::model::QualitativeEntry;
use tiger_core::scorecard::{Assessment, CalibrationProfile, MetricSnapshot, Radar};
use tiger_core::session::{AssessmentSession, SessionState};

use crate::report;
use crate::CliError;

/// A loaded dataset paired with the calibration it is assessed under.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub dataset: LoadedDataset,
    pub dataset_dir: PathBuf,
    pub calibration: CalibrationProfile,
}

impl Workspace {
    pub fn open(dataset_dir: &Path, calibration: &str) -> Result<Self, CliError> {
        let calibration = CalibrationProfile::resolve(calibration)?;
        calibration.validate()?;
        let dataset = load_dataset(dataset_dir, LoadOptions::default())?;
        Ok(Workspace { dataset, dataset_dir: dataset_dir.to_path_buf(), calibration })
    }

    /// A fresh session over this workspace, seeded with qualitative entries.
    pub fn new_session(&self, qualitative: &[QualitativeEntry], created_at: DateTime<Utc>) -> Result<AssessmentSession, CliError> {
        let mut session = AssessmentSession::new(
            self.dataset.content_hash.clone(),
            Some(self.dataset_dir.display().to_string()),
            self.calibration.id.clone(),
            created_at,
        );
        for entry in qualitative {
            let mutation = tiger_core::session::Mutation::AddQualitative { entry: entry.clone() };
            session = session.with_mutation(mutation, entry.entered_at.max(created_at))?;
        }
        Ok(session)
    }

    pub fn evaluate(&self, state: &SessionState) -> Result<Evaluation, CliError> {
        let (metrics, assessment) = tiger_core::scorecard::assess(
            &self.dataset.dataset,
            &state.overrides,
            &state.scenarios,
            &state.qualitative,
            &self.calibration,
        )?;
        // Derived from inputs only, so regenerating a report never changes it.
        let generated_at = state
            .qualitative
            .iter()
            .map(|q| q.entered_at)
            .chain([self.dataset.dataset.meta.snapshot_time])
            .max()
            .expect("snapshot time is always present");
        Ok(Evaluation {
            dao_name: self.dataset.dataset.meta.dao_name.clone(),
            dataset_hash: self.dataset.content_hash.clone(),
            sufficiency_bar: self.calibration.sufficiency_bar,
            scenarios: state.scenarios.iter().map(ToString::to_string).collect(),
            metrics,
            assessment,
            generated_at,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub dao_name: String,
    pub dataset_hash: String,
    pub sufficiency_bar: f64,
    pub scenarios: Vec<String>,
    pub metrics: MetricSnapshot,
    pub assessment: Assessment,
    pub generated_at: DateTime<Utc>,
}

/// Canonical JSON document: pretty-printed with a trailing newline.
pub fn json_document<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("documents serialize");
    out.push(b'\n');
    out
}

impl Evaluation {
    pub fn radar(&self) -> &Radar {
        &self.assessment.radar
    }

    pub fn assessment_json(&self) -> Vec<u8> {
        json_document(&self.assessment)
    }

    pub fn radar_json(&self) -> Vec<u8> {
        json_document(self.radar())
    }

    pub fn metrics_json(&self) -> Vec<u8> {
        json_document(&self.metrics)
    }

    pub fn report(&self) -> String {
        report::render(self)
    }
}
