use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{apply_scenarios, CalibrationProfile, ScenarioSpec, ScorecardError};
use crate::metrics::{
    decisiveness, delegation_stats, gini, governance_nakamoto, group_differentiation, inflation_split,
    insider_holdings, insider_share, nakamoto, participation, timing_fairness, via_power_vector, Decisiveness,
    DelegationStats, GovernanceNakamoto, GroupDifferentiation, InflationSplit, InsiderHoldings, MetricError,
    Opposition, ParticipationStats, TimingFairness, Window, WeightVector,
};
use crate::model::{
    Address, Basis, CapabilityFlags, CharacteristicId, Dimension, GovernanceDataset, PauseGuardian,
    QualitativeEntry, TokenAmount,
};
use crate::taxonomy::{apply_overrides, class_counts, classify_dataset, AgentClass, AgentProfile};

/// Every quantifier the scorecard reads, plus context shown in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSnapshot {
    pub insider_share_pct: f64,
    pub insider_holdings: InsiderHoldings,
    pub group_differentiation: GroupDifferentiation,
    pub via_count: usize,
    pub via_voting_power: TokenAmount,
    /// `None` when no VIA holds voting power.
    pub via_nakamoto: Option<usize>,
    pub via_gini: Option<f64>,
    pub holder_gini: Option<f64>,
    pub nakamoto_threshold: f64,
    pub nakamoto_strict: bool,
    pub quorum: TokenAmount,
    pub opposition: Opposition,
    pub governance_nakamoto: GovernanceNakamoto,
    pub timing: TimingFairness,
    pub capabilities: CapabilityFlags,
    pub delegation: DelegationStats,
    pub participation_window: Window,
    pub participation: Option<ParticipationStats>,
    pub decisiveness: Option<Decisiveness>,
    pub inflation: InflationSplit,
    pub class_counts: BTreeMap<AgentClass, usize>,
}

fn optional<T>(r: Result<T, MetricError>) -> Result<Option<T>, MetricError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(MetricError::EmptyWeights | MetricError::ZeroTotal | MetricError::EmptyWindow) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn compute_metrics(
    dataset: &GovernanceDataset,
    profiles: &[AgentProfile],
    calibration: &CalibrationProfile,
) -> Result<MetricSnapshot, ScorecardError> {
    let via = via_power_vector(dataset, profiles)?;
    let holders = WeightVector::new(
        dataset
            .balances
            .iter()
            .filter(|b| !b.is_contract)
            .map(|b| (b.address.to_string(), b.balance))
            .collect(),
    )?;
    let opposition = match dataset.params.assumed_opposition {
        Some(a) => Opposition::Fixed(a),
        None => Opposition::None,
    };
    let window = calibration.participation_window;
    Ok(MetricSnapshot {
        insider_share_pct: insider_share(&dataset.allocation),
        insider_holdings: insider_holdings(dataset),
        group_differentiation: group_differentiation(&dataset.allocation),
        via_count: via.len(),
        via_voting_power: via.total(),
        via_nakamoto: optional(nakamoto(&via, calibration.nakamoto_threshold, calibration.nakamoto_strict))?,
        via_gini: optional(gini(&via))?,
        holder_gini: optional(gini(&holders))?,
        nakamoto_threshold: calibration.nakamoto_threshold,
        nakamoto_strict: calibration.nakamoto_strict,
        quorum: dataset.params.quorum,
        opposition,
        governance_nakamoto: governance_nakamoto(&via, dataset.params.quorum, opposition),
        timing: timing_fairness(&dataset.params, calibration.min_total_days),
        capabilities: dataset.capabilities.clone(),
        delegation: delegation_stats(dataset, profiles)?,
        participation_window: window,
        participation: optional(participation(dataset, window))?,
        decisiveness: optional(decisiveness(dataset, profiles, window, calibration.decisiveness_k))?,
        inflation: inflation_split(&dataset.allocation),
        class_counts: class_counts(profiles),
    })
}

/// The values that ladders read. Each field has a favorable direction:
/// lower for the three percentages of insider and largest-group share and
/// insider inflation, higher for the counts and participation, and for the
/// capability fields `None` (no such power) is best.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringInputs {
    pub insider_share_pct: f64,
    pub largest_group_share_pct: f64,
    pub via_nakamoto: usize,
    pub freeze_agents: Option<u32>,
    pub upgrade_agents: Option<u32>,
    pub governance_nakamoto: usize,
    pub timing_pass: bool,
    pub distinct_via_delegates: usize,
    pub float_participation_pct: f64,
    pub pause_guardian: Option<PauseGuardian>,
    pub pct_b_insider: f64,
    /// Reported with token distribution; not scored.
    pub insider_holdings_pct: f64,
}

impl ScoringInputs {
    pub fn from_snapshot(m: &MetricSnapshot) -> Self {
        let caps = &m.capabilities;
        ScoringInputs {
            insider_share_pct: m.insider_share_pct,
            largest_group_share_pct: m.group_differentiation.largest_share_pct,
            via_nakamoto: m.via_nakamoto.unwrap_or(0),
            freeze_agents: caps.can_freeze_balances.then(|| caps.freeze_agent_count.unwrap_or(0)),
            upgrade_agents: caps.can_upgrade_code.then(|| caps.upgrade_agent_count.unwrap_or(0)),
            governance_nakamoto: m.governance_nakamoto.count().unwrap_or(0),
            timing_pass: m.timing.pass,
            distinct_via_delegates: m.delegation.distinct_via_delegates,
            float_participation_pct: m.participation.as_ref().map_or(0.0, |p| p.float_participation_pct),
            pause_guardian: caps.pause_guardian.clone(),
            pct_b_insider: m.inflation.pct_b_insider,
            insider_holdings_pct: m.insider_holdings.pct_of_max_supply,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicResult {
    pub id: CharacteristicId,
    pub dimension: Dimension,
    pub basis: Basis,
    pub critical: bool,
    pub metric_values: BTreeMap<String, f64>,
    /// `None` when indeterminate.
    pub score: Option<u8>,
    pub indeterminate: bool,
    pub grace_applied: bool,
    pub evidence: String,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Sufficient,
    NotSufficient,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Sufficient => "sufficient",
            Verdict::NotSufficient => "not_sufficient",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// Dimension scores in T, I, G, E, R order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Radar {
    pub axes: Vec<Dimension>,
    pub values: Vec<Option<f64>>,
    pub indeterminate: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub calibration_id: String,
    pub characteristics: Vec<CharacteristicResult>,
    pub dimension_scores: BTreeMap<Dimension, Option<f64>>,
    /// Mean of the dimension scores, rounded half-up to one decimal.
    pub overall: Option<f64>,
    pub radar: Radar,
    pub verdict: Verdict,
    pub critical_failures: Vec<CharacteristicId>,
    pub indeterminate: Vec<CharacteristicId>,
}

impl Assessment {
    pub fn characteristic(&self, id: CharacteristicId) -> &CharacteristicResult {
        self.characteristics
            .iter()
            .find(|c| c.id == id)
            .expect("assessment holds every characteristic")
    }
}

pub fn radar(assessment: &Assessment) -> Radar {
    let values: Vec<Option<f64>> = Dimension::ALL
        .iter()
        .map(|d| assessment.dimension_scores.get(d).copied().flatten())
        .collect();
    Radar {
        axes: Dimension::ALL.to_vec(),
        indeterminate: values.iter().map(Option::is_none).collect(),
        values,
    }
}

/// Latest entry per characteristic; later list position wins a timestamp tie.
fn latest_entries(
    qualitative: &[QualitativeEntry],
) -> Result<BTreeMap<CharacteristicId, &QualitativeEntry>, ScorecardError> {
    let mut latest: BTreeMap<CharacteristicId, &QualitativeEntry> = BTreeMap::new();
    for q in qualitative {
        q.validate().map_err(|source| ScorecardError::InvalidQualitative {
            characteristic: q.characteristic,
            source,
        })?;
        match latest.get(&q.characteristic) {
            Some(prev) if prev.entered_at > q.entered_at => {}
            _ => {
                latest.insert(q.characteristic, q);
            }
        }
    }
    Ok(latest)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

const DATASET_POWER: [&str; 3] = ["balances.csv", "delegations.csv", "agents.csv"];

/// Computed part of a non-qualitative characteristic.
struct Computed {
    score: u8,
    values: Vec<(&'static str, f64)>,
    evidence: String,
    provenance: Vec<&'static str>,
}

fn compute(id: CharacteristicId, m: &ScoringInputs, cal: &CalibrationProfile) -> Result<Computed, ScorecardError> {
    use CharacteristicId::*;
    let ladder = |c: CharacteristicId| cal.ladders.get(&c).copied().ok_or(ScorecardError::MissingLadder(c));
    let capability = |agents: Option<u32>, what: &str| -> Result<Computed, ScorecardError> {
        let score = match agents {
            None => 5,
            Some(n) => ladder(id)?.score(n as f64),
        };
        Ok(Computed {
            score,
            values: vec![
                ("capability_present", flag(agents.is_some())),
                ("required_agents", agents.unwrap_or(0) as f64),
            ],
            evidence: match agents {
                None => format!("No agent can {what}."),
                Some(n) => format!("{n} agent(s) acting together can {what}."),
            },
            provenance: vec!["capabilities.json"],
        })
    };
    Ok(match id {
        TokenDistribution => Computed {
            score: ladder(id)?.score(m.insider_share_pct),
            values: vec![
                ("insider_share_pct", m.insider_share_pct),
                ("insider_holdings_pct", m.insider_holdings_pct),
            ],
            evidence: format!("Insider groups are allocated {:.2}% of maximum supply.", m.insider_share_pct),
            provenance: vec!["allocation.json"],
        },
        NonCollusiveOligopoly => Computed {
            score: ladder(id)?.score(m.largest_group_share_pct),
            values: vec![("largest_group_share_pct", m.largest_group_share_pct)],
            evidence: format!(
                "The largest stakeholder group holds {:.2}% of maximum supply. Collusion between groups requires qualitative review.",
                m.largest_group_share_pct
            ),
            provenance: vec!["allocation.json"],
        },
        VotingPowerConcentration => Computed {
            score: ladder(id)?.score(m.via_nakamoto as f64),
            values: vec![("via_nakamoto", m.via_nakamoto as f64)],
            evidence: format!(
                "{} verifiably independent agent(s) together control a majority of VIA voting power.",
                m.via_nakamoto
            ),
            provenance: DATASET_POWER.to_vec(),
        },
        TokenFreezeThaw => capability(m.freeze_agents, "freeze or thaw balances")?,
        CodeUpgrades => capability(m.upgrade_agents, "upgrade contract code")?,
        Access | VotingAccess => {
            let via_score = ladder(id)?.score(m.governance_nakamoto as f64);
            let timing_score = if m.timing_pass { 5 } else { 1 };
            Computed {
                score: via_score.min(timing_score),
                values: vec![
                    ("governance_nakamoto", m.governance_nakamoto as f64),
                    ("governance_nakamoto_score", via_score as f64),
                    ("timing_pass", flag(m.timing_pass)),
                    ("timing_score", timing_score as f64),
                ],
                evidence: format!(
                    "{} VIA(s) can carry a proposal; the decision timeline {} the minimum.",
                    m.governance_nakamoto,
                    if m.timing_pass { "meets" } else { "falls short of" }
                ),
                provenance: [&DATASET_POWER[..], &["params.json"]].concat(),
            }
        }
        VotingDelegation => Computed {
            score: ladder(id)?.score(m.distinct_via_delegates as f64),
            values: vec![("distinct_via_delegates", m.distinct_via_delegates as f64)],
            evidence: format!("{} delegatees are verifiably independent agents.", m.distinct_via_delegates),
            provenance: DATASET_POWER.to_vec(),
        },
        VotingParticipation => Computed {
            score: ladder(id)?.score(m.float_participation_pct),
            values: vec![("float_participation_pct", m.float_participation_pct)],
            evidence: format!(
                "Average cast weight per proposal is {:.2}% of circulating supply.",
                m.float_participation_pct
            ),
            provenance: vec!["votes.csv", "proposals.jsonl", "allocation.json"],
        },
        CrisisManagement => {
            let (score, evidence) = match &m.pause_guardian {
                None => (cal.crisis.absent_score, "No emergency pause power exists.".to_string()),
                Some(g) if !g.community_controlled => (
                    cal.crisis.non_community_score,
                    "Emergency powers are not under community control.".to_string(),
                ),
                Some(g) => {
                    let s = ladder(id)?.score(g.holder_count as f64);
                    let s = if g.is_full_shutdown { s.min(cal.crisis.full_shutdown_cap) } else { s };
                    let scope = if g.is_full_shutdown { "the whole system" } else { "selected functions" };
                    (s, format!("A community-controlled guardian with {} holder(s) can pause {scope}.", g.holder_count))
                }
            };
            let g = m.pause_guardian.as_ref();
            Computed {
                score,
                values: vec![
                    ("pause_guardian_present", flag(g.is_some())),
                    ("guardian_holder_count", g.map_or(0.0, |g| g.holder_count as f64)),
                    ("guardian_full_shutdown", flag(g.is_some_and(|g| g.is_full_shutdown))),
                    ("guardian_community_controlled", flag(g.is_some_and(|g| g.community_controlled))),
                ],
                evidence,
                provenance: vec!["capabilities.json"],
            }
        }
        Inflation => Computed {
            score: ladder(id)?.score(m.pct_b_insider),
            values: vec![("pct_b_insider", m.pct_b_insider)],
            evidence: format!("{:.2}% of daily inflation goes to insiders.", m.pct_b_insider),
            provenance: vec!["allocation.json"],
        },
        Bootstrapping | SoftPower | ResponsibilityAlignment | Accountability => {
            unreachable!("qualitative characteristics are not computed")
        }
    })
}

fn provenance_of(q: &QualitativeEntry) -> String {
    format!("qualitative: {} at {}", q.assessor, q.entered_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

fn score_characteristic(
    id: CharacteristicId,
    inputs: &ScoringInputs,
    entry: Option<&QualitativeEntry>,
    cal: &CalibrationProfile,
) -> Result<CharacteristicResult, ScorecardError> {
    let (score, metric_values, evidence, provenance) = match id.basis() {
        Basis::Qualitative => match entry {
            Some(q) => (Some(q.score), BTreeMap::new(), q.evidence.clone(), vec![provenance_of(q)]),
            None => (None, BTreeMap::new(), "Awaiting qualitative assessment.".to_string(), vec![]),
        },
        Basis::Quantitative | Basis::Mixed => {
            let c = compute(id, inputs, cal)?;
            let mut values: BTreeMap<String, f64> = c.values.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            let mut provenance: Vec<String> = c.provenance.into_iter().map(String::from).collect();
            let mut evidence = c.evidence;
            let mut score = c.score;
            if let (Basis::Mixed, Some(q)) = (id.basis(), entry) {
                values.insert("qualitative_score".into(), q.score as f64);
                score = score.min(q.score);
                if !q.evidence.is_empty() {
                    evidence = format!("{evidence} {}", q.evidence);
                }
                provenance.push(provenance_of(q));
            }
            (Some(score), values, evidence, provenance)
        }
    };

    let grace = &cal.grace_period;
    let (score, grace_applied) = match score {
        Some(s) if grace.enabled && grace.characteristics.contains(&id) && s < grace.declared_intent_score_floor => {
            (Some(grace.declared_intent_score_floor), true)
        }
        s => (s, false),
    };

    Ok(CharacteristicResult {
        id,
        dimension: id.dimension(),
        basis: id.basis(),
        critical: cal.critical.contains(&id),
        metric_values,
        indeterminate: score.is_none(),
        score,
        grace_applied,
        evidence,
        provenance,
    })
}

fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Scores all characteristics from already-extracted inputs and aggregates.
pub fn score(
    inputs: &ScoringInputs,
    qualitative: &[QualitativeEntry],
    calibration: &CalibrationProfile,
) -> Result<Assessment, ScorecardError> {
    calibration.validate()?;
    let entries = latest_entries(qualitative)?;
    let characteristics = CharacteristicId::ALL
        .iter()
        .map(|&id| score_characteristic(id, inputs, entries.get(&id).copied(), calibration))
        .collect::<Result<Vec<_>, _>>()?;

    let mut exact: BTreeMap<Dimension, Option<Ratio<u64>>> = BTreeMap::new();
    for d in Dimension::ALL {
        let scores: Option<Vec<u64>> = characteristics
            .iter()
            .filter(|c| c.dimension == d)
            .map(|c| c.score.map(u64::from))
            .collect();
        exact.insert(d, scores.map(|s| Ratio::new(s.iter().sum(), s.len() as u64)));
    }
    let overall = exact
        .values()
        .copied()
        .collect::<Option<Vec<_>>>()
        .map(|dims| {
            let mean = dims.iter().sum::<Ratio<u64>>() / dims.len() as u64;
            // Half-up to tenths, exactly.
            let tenths = (mean * 10 + Ratio::new(1, 2)).floor().to_integer();
            tenths as f64 / 10.0
        });

    let critical_failures: Vec<CharacteristicId> = characteristics
        .iter()
        .filter(|c| c.critical && c.score.is_some_and(|s| s <= calibration.critical_fail_bound))
        .map(|c| c.id)
        .collect();
    let indeterminate: Vec<CharacteristicId> =
        characteristics.iter().filter(|c| c.indeterminate).map(|c| c.id).collect();

    let verdict = match overall {
        _ if !critical_failures.is_empty() => Verdict::NotSufficient,
        None => Verdict::Indeterminate,
        Some(o) if o >= calibration.sufficiency_bar => Verdict::Sufficient,
        Some(_) => Verdict::NotSufficient,
    };

    let mut assessment = Assessment {
        calibration_id: calibration.id.clone(),
        characteristics,
        dimension_scores: exact.into_iter().map(|(d, r)| (d, r.map(to_f64))).collect(),
        overall,
        radar: Radar { axes: vec![], values: vec![], indeterminate: vec![] },
        verdict,
        critical_failures,
        indeterminate,
    };
    assessment.radar = radar(&assessment);
    Ok(assessment)
}

/// Scores a dataset given already-classified profiles.
pub fn evaluate(
    dataset: &GovernanceDataset,
    profiles: &[AgentProfile],
    qualitative: &[QualitativeEntry],
    calibration: &CalibrationProfile,
) -> Result<Assessment, ScorecardError> {
    calibration.validate()?;
    let metrics = compute_metrics(dataset, profiles, calibration)?;
    score(&ScoringInputs::from_snapshot(&metrics), qualitative, calibration)
}

/// Full pipeline: scenarios, classification, overrides, metrics and scoring.
pub fn assess(
    dataset: &GovernanceDataset,
    overrides: &BTreeMap<Address, AgentClass>,
    scenarios: &[ScenarioSpec],
    qualitative: &[QualitativeEntry],
    calibration: &CalibrationProfile,
) -> Result<(MetricSnapshot, Assessment), ScorecardError> {
    calibration.validate()?;
    let dataset = apply_scenarios(dataset, scenarios)?;
    let profiles = apply_overrides(&classify_dataset(&dataset, &calibration.taxonomy)?, overrides)?;
    let metrics = compute_metrics(&dataset, &profiles, calibration)?;
    let assessment = score(&ScoringInputs::from_snapshot(&metrics), qualitative, calibration)?;
    Ok((metrics, assessment))
}
