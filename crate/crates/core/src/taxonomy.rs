//! Agent classification: every address is a VIA, PIA or UIA.
//!
//! Evidence arrives as pre-extracted features (identity proof, activity
//! fraction, automation flag, cross-DAO interactions). An explicit
//! `manual_class` in the evidence or a session override always wins.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Address, GovernanceDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgentClass {
    /// Verifiably independent agent.
    #[serde(rename = "VIA")]
    Via,
    /// Presumably independent agent.
    #[serde(rename = "PIA")]
    Pia,
    /// Unidentifiable agent.
    #[serde(rename = "UIA")]
    Uia,
}

impl AgentClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentClass::Via => "VIA",
            AgentClass::Pia => "PIA",
            AgentClass::Uia => "UIA",
        }
    }
}

impl fmt::Display for AgentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentClass {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "VIA" => Ok(AgentClass::Via),
            "PIA" => Ok(AgentClass::Pia),
            "UIA" => Ok(AgentClass::Uia),
            other => Err(TaxonomyError::UnknownClass(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentEvidence {
    pub address: Address,
    pub identity_evidence: bool,
    pub active_days_fraction: f64,
    pub automation_flag: bool,
    pub cross_dao_count: u32,
    pub manual_class: Option<AgentClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassBasis {
    ManualOverride,
    Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub address: Address,
    pub class: AgentClass,
    pub basis: ClassBasis,
    pub matched_rule: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyConfig {
    pub pia_min_active_fraction: f64,
    pub pia_min_cross_dao: u32,
}

impl Default for TaxonomyConfig {
    fn default() -> Self {
        TaxonomyConfig {
            pia_min_active_fraction: 0.5,
            pia_min_cross_dao: 1,
        }
    }
}

impl TaxonomyConfig {
    pub fn validate(&self) -> Result<(), TaxonomyError> {
        if !(0.0..=1.0).contains(&self.pia_min_active_fraction) {
            return Err(TaxonomyError::InvalidConfig(format!(
                "pia_min_active_fraction {} outside [0, 1]",
                self.pia_min_active_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("duplicate evidence record for {0}")]
    DuplicateAddress(Address),
    #[error("override for unknown address {0}")]
    UnknownAddress(Address),
    #[error("unknown agent class {0:?}")]
    UnknownClass(String),
    #[error("invalid taxonomy config: {0}")]
    InvalidConfig(String),
}

pub const RULE_MANUAL: &str = "manual_class";
pub const RULE_OVERRIDE: &str = "session_override";
pub const RULE_IDENTITY: &str = "identity_evidence";
pub const RULE_ACTIVITY: &str = "non_automated_daily_activity";
pub const RULE_DEFAULT: &str = "default_unidentified";
pub const RULE_NO_EVIDENCE: &str = "no_evidence";

fn classify_one(e: &AgentEvidence, config: &TaxonomyConfig) -> AgentProfile {
    let (class, basis, rule) = if let Some(class) = e.manual_class {
        (class, ClassBasis::ManualOverride, RULE_MANUAL)
    } else if e.identity_evidence {
        (AgentClass::Via, ClassBasis::Rule, RULE_IDENTITY)
    } else if !e.automation_flag
        && e.active_days_fraction >= config.pia_min_active_fraction
        && e.cross_dao_count >= config.pia_min_cross_dao
    {
        (AgentClass::Pia, ClassBasis::Rule, RULE_ACTIVITY)
    } else {
        (AgentClass::Uia, ClassBasis::Rule, RULE_DEFAULT)
    };
    AgentProfile {
        address: e.address.clone(),
        class,
        basis,
        matched_rule: rule.to_string(),
    }
}

/// Classifies each evidence record. Output is sorted by address.
pub fn classify(
    evidence: &[AgentEvidence],
    config: &TaxonomyConfig,
) -> Result<Vec<AgentProfile>, TaxonomyError> {
    config.validate()?;
    let mut out = BTreeMap::new();
    for e in evidence {
        if out.insert(e.address.clone(), classify_one(e, config)).is_some() {
            return Err(TaxonomyError::DuplicateAddress(e.address.clone()));
        }
    }
    Ok(out.into_values().collect())
}

/// Classifies every known address of a dataset. Addresses without an
/// evidence record are UIA.
pub fn classify_dataset(
    dataset: &GovernanceDataset,
    config: &TaxonomyConfig,
) -> Result<Vec<AgentProfile>, TaxonomyError> {
    let mut profiles: BTreeMap<Address, AgentProfile> = classify(&dataset.agent_evidence, config)?
        .into_iter()
        .map(|p| (p.address.clone(), p))
        .collect();
    for b in &dataset.balances {
        profiles.entry(b.address.clone()).or_insert_with(|| AgentProfile {
            address: b.address.clone(),
            class: AgentClass::Uia,
            basis: ClassBasis::Rule,
            matched_rule: RULE_NO_EVIDENCE.to_string(),
        });
    }
    Ok(profiles.into_values().collect())
}

/// Replaces the class of each overridden address. Every override must name
/// an address present in `profiles`.
pub fn apply_overrides(
    profiles: &[AgentProfile],
    overrides: &BTreeMap<Address, AgentClass>,
) -> Result<Vec<AgentProfile>, TaxonomyError> {
    let known: BTreeSet<&Address> = profiles.iter().map(|p| &p.address).collect();
    if let Some(unknown) = overrides.keys().find(|a| !known.contains(a)) {
        return Err(TaxonomyError::UnknownAddress(unknown.clone()));
    }
    Ok(profiles
        .iter()
        .map(|p| match overrides.get(&p.address) {
            Some(&class) => AgentProfile {
                address: p.address.clone(),
                class,
                basis: ClassBasis::ManualOverride,
                matched_rule: RULE_OVERRIDE.to_string(),
            },
            None => p.clone(),
        })
        .collect())
}

/// Address → class lookup. Unlisted addresses are UIA.
#[derive(Debug, Clone, Default)]
pub struct ClassIndex(BTreeMap<Address, AgentClass>);

impl ClassIndex {
    pub fn new(profiles: &[AgentProfile]) -> Self {
        ClassIndex(profiles.iter().map(|p| (p.address.clone(), p.class)).collect())
    }

    pub fn class_of(&self, address: &Address) -> AgentClass {
        self.0.get(address).copied().unwrap_or(AgentClass::Uia)
    }

    pub fn is_via(&self, address: &Address) -> bool {
        self.class_of(address) == AgentClass::Via
    }
}

/// Count of profiles per class.
pub fn class_counts(profiles: &[AgentProfile]) -> BTreeMap<AgentClass, usize> {
    let mut counts = BTreeMap::from([(AgentClass::Via, 0), (AgentClass::Pia, 0), (AgentClass::Uia, 0)]);
    for p in profiles {
        *counts.entry(p.class).or_default() += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn addr(n: u32) -> Address {
        format!("0x{:040x}", n).parse().unwrap()
    }

    fn evidence(n: u32) -> AgentEvidence {
        AgentEvidence {
            address: addr(n),
            identity_evidence: false,
            active_days_fraction: 0.0,
            automation_flag: false,
            cross_dao_count: 0,
            manual_class: None,
        }
    }

    #[test]
    fn identity_makes_via() {
        let e = AgentEvidence {
            identity_evidence: true,
            automation_flag: true,
            ..evidence(1)
        };
        let p = classify(&[e], &TaxonomyConfig::default()).unwrap();
        assert_eq!(p[0].class, AgentClass::Via);
        assert_eq!(p[0].matched_rule, RULE_IDENTITY);
    }

    #[test]
    fn active_non_automated_makes_pia() {
        let e = AgentEvidence {
            active_days_fraction: 0.9,
            cross_dao_count: 2,
            ..evidence(1)
        };
        let p = classify(&[e.clone()], &TaxonomyConfig::default()).unwrap();
        assert_eq!(p[0].class, AgentClass::Pia);

        let automated = AgentEvidence { automation_flag: true, ..e.clone() };
        assert_eq!(classify(&[automated], &TaxonomyConfig::default()).unwrap()[0].class, AgentClass::Uia);

        let boundary = AgentEvidence { active_days_fraction: 0.5, cross_dao_count: 1, ..e };
        assert_eq!(classify(&[boundary], &TaxonomyConfig::default()).unwrap()[0].class, AgentClass::Pia);
    }

    #[test]
    fn manual_class_wins() {
        let e = AgentEvidence {
            identity_evidence: true,
            manual_class: Some(AgentClass::Uia),
            ..evidence(1)
        };
        let p = classify(&[e], &TaxonomyConfig::default()).unwrap();
        assert_eq!(p[0].class, AgentClass::Uia);
        assert_eq!(p[0].basis, ClassBasis::ManualOverride);
    }

    #[test]
    fn duplicates_rejected() {
        let err = classify(&[evidence(1), evidence(1)], &TaxonomyConfig::default()).unwrap_err();
        assert_eq!(err, TaxonomyError::DuplicateAddress(addr(1)));
    }

    #[test]
    fn overrides() {
        let profiles = classify(&[evidence(1), evidence(2)], &TaxonomyConfig::default()).unwrap();
        assert_eq!(apply_overrides(&profiles, &BTreeMap::new()).unwrap(), profiles);

        let ov = BTreeMap::from([(addr(2), AgentClass::Via)]);
        let changed = apply_overrides(&profiles, &ov).unwrap();
        let diffs = profiles.iter().zip(&changed).filter(|(a, b)| a != b).count();
        assert_eq!(diffs, 1);
        assert_eq!(changed[1].class, AgentClass::Via);
        assert_eq!(changed[1].basis, ClassBasis::ManualOverride);

        // Reclassifying and reapplying keeps the override.
        let again = classify(&[evidence(2), evidence(1)], &TaxonomyConfig::default()).unwrap();
        assert_eq!(apply_overrides(&again, &ov).unwrap(), changed);

        let bad = BTreeMap::from([(addr(7), AgentClass::Via)]);
        assert_eq!(apply_overrides(&profiles, &bad), Err(TaxonomyError::UnknownAddress(addr(7))));
    }

    #[test]
    fn invalid_config() {
        let cfg = TaxonomyConfig { pia_min_active_fraction: 1.5, ..Default::default() };
        assert!(classify(&[], &cfg).is_err());
    }

    fn arb_evidence() -> impl Strategy<Value = Vec<AgentEvidence>> {
        prop::collection::vec(
            (any::<bool>(), 0.0f64..=1.0, any::<bool>(), 0u32..4, prop::option::of(0u8..3)),
            0..40,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (id, frac, auto, cross, manual))| AgentEvidence {
                    address: addr(i as u32),
                    identity_evidence: id,
                    active_days_fraction: frac,
                    automation_flag: auto,
                    cross_dao_count: cross,
                    manual_class: manual.map(|m| [AgentClass::Via, AgentClass::Pia, AgentClass::Uia][m as usize]),
                })
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn partition_and_order_independence(ev in arb_evidence(), seed in any::<u64>()) {
            let cfg = TaxonomyConfig::default();
            let p = classify(&ev, &cfg).unwrap();
            prop_assert_eq!(p.len(), ev.len());
            let counts = class_counts(&p);
            prop_assert_eq!(counts.values().sum::<usize>(), ev.len());

            let mut shuffled = ev.clone();
            let n = shuffled.len();
            if n > 1 {
                shuffled.rotate_left((seed as usize) % n);
                shuffled.swap(0, n - 1);
            }
            prop_assert_eq!(classify(&shuffled, &cfg).unwrap(), p);
        }

        #[test]
        fn raising_activity_threshold_never_promotes(ev in arb_evidence(), lo in 0.0f64..=1.0, hi in 0.0f64..=1.0) {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let a = classify(&ev, &TaxonomyConfig { pia_min_active_fraction: lo, pia_min_cross_dao: 1 }).unwrap();
            let b = classify(&ev, &TaxonomyConfig { pia_min_active_fraction: hi, pia_min_cross_dao: 1 }).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(!(x.class == AgentClass::Uia && y.class == AgentClass::Pia));
            }
        }
    }
}
