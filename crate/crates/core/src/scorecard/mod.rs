//! Scores the fifteen characteristics and aggregates them into dimension
//! scores, an overall score and a sufficiency verdict.

mod calibration;
mod evaluate;
mod scenario;

use thiserror::Error;

pub use calibration::{CalibrationProfile, CrisisRules, Direction, GracePeriod, Ladder, PAPER_2022};
pub use evaluate::{
    assess, compute_metrics, evaluate, radar, score, Assessment, CharacteristicResult, MetricSnapshot, Radar,
    ScoringInputs, Verdict,
};
pub use scenario::{apply_scenario, apply_scenarios, CapabilityFlag, ScenarioError, ScenarioSpec};

use crate::metrics::MetricError;
use crate::model::{CharacteristicId, ModelError};
use crate::taxonomy::TaxonomyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScorecardError {
    #[error("calibration has no ladder for {0}")]
    MissingLadder(CharacteristicId),
    #[error("unknown calibration profile: {0}")]
    UnknownCalibration(String),
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("invalid qualitative entry for {characteristic}: {source}")]
    InvalidQualitative {
        characteristic: CharacteristicId,
        source: ModelError,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}
