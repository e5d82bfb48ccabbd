//! Calibration profiles: the breakpoints and policy knobs that turn metric
//! values into 1–5 scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScorecardError;
use crate::metrics::Window;
use crate::model::{Basis, CharacteristicId};
use crate::taxonomy::TaxonomyConfig;

/// Id of the built-in profile that reproduces the Compound reference scores.
pub const PAPER_2022: &str = "paper-2022";

const PAPER_2022_JSON: &str = include_str!("../../calibrations/paper-2022.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// Breakpoints for scores 5, 4, 3 and 2; anything past the last is a 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub direction: Direction,
    pub breakpoints: [f64; 4],
}

impl Ladder {
    pub fn higher(breakpoints: [f64; 4]) -> Self {
        Ladder { direction: Direction::HigherIsBetter, breakpoints }
    }

    pub fn lower(breakpoints: [f64; 4]) -> Self {
        Ladder { direction: Direction::LowerIsBetter, breakpoints }
    }

    pub fn score(&self, value: f64) -> u8 {
        let reached = |b: f64| match self.direction {
            Direction::HigherIsBetter => value >= b,
            Direction::LowerIsBetter => value <= b,
        };
        self.breakpoints
            .iter()
            .position(|&b| reached(b))
            .map(|i| 5 - i as u8)
            .unwrap_or(1)
    }

    fn is_strictly_monotonic(&self) -> bool {
        self.breakpoints.iter().all(|b| b.is_finite())
            && self.breakpoints.windows(2).all(|w| match self.direction {
                Direction::HigherIsBetter => w[0] > w[1],
                Direction::LowerIsBetter => w[0] < w[1],
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GracePeriod {
    pub enabled: bool,
    /// Scores below this are raised to it for the listed characteristics.
    pub declared_intent_score_floor: u8,
    /// Characteristics whose centralization the DAO has declared as part of
    /// its bootstrapping plan.
    pub characteristics: Vec<CharacteristicId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrisisRules {
    /// Score when no pause guardian or other emergency power exists.
    pub absent_score: u8,
    /// Score when emergency powers are not under community control.
    pub non_community_score: u8,
    /// Cap applied when the emergency power can halt the whole system.
    pub full_shutdown_cap: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    pub id: String,
    pub ladders: BTreeMap<CharacteristicId, Ladder>,
    pub critical: BTreeSet<CharacteristicId>,
    /// A critical characteristic scoring at or below this fails the verdict.
    pub critical_fail_bound: u8,
    pub nakamoto_threshold: f64,
    pub nakamoto_strict: bool,
    pub min_total_days: u32,
    pub sufficiency_bar: f64,
    pub participation_window: Window,
    pub decisiveness_k: usize,
    pub crisis: CrisisRules,
    pub grace_period: GracePeriod,
    pub taxonomy: TaxonomyConfig,
}

impl CalibrationProfile {
    pub fn paper_2022() -> Self {
        serde_json::from_str(PAPER_2022_JSON).expect("built-in calibration parses")
    }

    /// Resolves a profile id: the built-in id, or a path to a JSON profile.
    pub fn resolve(id_or_path: &str) -> Result<Self, ScorecardError> {
        if id_or_path == PAPER_2022 {
            return Ok(Self::paper_2022());
        }
        let path = Path::new(id_or_path);
        let text = fs::read_to_string(path)
            .map_err(|_| ScorecardError::UnknownCalibration(id_or_path.to_string()))?;
        let profile: CalibrationProfile = serde_json::from_str(&text)
            .map_err(|e| ScorecardError::InvalidCalibration(format!("{id_or_path}: {e}")))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), ScorecardError> {
        let bad = |msg: String| Err(ScorecardError::InvalidCalibration(msg));
        for c in CharacteristicId::ALL {
            match (c.basis(), self.ladders.get(&c)) {
                (Basis::Qualitative, Some(_)) => return bad(format!("{c} is qualitative and takes no ladder")),
                (Basis::Quantitative | Basis::Mixed, None) => return Err(ScorecardError::MissingLadder(c)),
                (_, Some(l)) if !l.is_strictly_monotonic() => {
                    return bad(format!("ladder for {c} is not strictly monotonic"))
                }
                _ => {}
            }
        }
        if !(1..=5).contains(&self.critical_fail_bound) {
            return bad("critical_fail_bound must lie in 1..=5".into());
        }
        if !(self.nakamoto_threshold > 0.0 && self.nakamoto_threshold <= 1.0) {
            return bad("nakamoto_threshold must lie in (0, 1]".into());
        }
        if !(1.0..=5.0).contains(&self.sufficiency_bar) {
            return bad("sufficiency_bar must lie in [1, 5]".into());
        }
        for s in [
            self.crisis.absent_score,
            self.crisis.non_community_score,
            self.crisis.full_shutdown_cap,
            self.grace_period.declared_intent_score_floor,
        ] {
            if !(1..=5).contains(&s) {
                return bad(format!("score {s} outside 1..=5"));
            }
        }
        self.taxonomy
            .validate()
            .map_err(|e| ScorecardError::InvalidCalibration(e.to_string()))
    }
}
