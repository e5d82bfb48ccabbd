//! Turnout, float participation and decisiveness over a time window.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Datelike, Duration, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::model::{ratio, Address, GovernanceDataset, Proposal, TokenAmount};
use crate::taxonomy::{AgentProfile, ClassIndex};

/// Mean Gregorian month length in days.
const DAYS_PER_MONTH: f64 = 365.2425 / 12.0;

/// Which proposals a participation metric looks at, by submission time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Window {
    /// From launch up to and including the snapshot.
    Lifetime,
    /// The calendar year containing the snapshot, up to the snapshot.
    SnapshotYear,
    Year(i32),
    /// The given number of days ending at the snapshot.
    TrailingDays(u32),
}

impl Window {
    /// Inclusive bounds `[start, end]` for this window on `dataset`.
    pub fn bounds(self, dataset: &GovernanceDataset) -> (DateTime<Utc>, DateTime<Utc>) {
        let snapshot = dataset.meta.snapshot_time;
        let year_start = |y: i32| Utc.with_ymd_and_hms(y, 1, 1, 0, 0, 0).single().expect("valid year");
        match self {
            Window::Lifetime => (dataset.lifetime_start(), snapshot),
            Window::SnapshotYear => (year_start(snapshot.year()), snapshot),
            Window::Year(y) => (year_start(y), year_start(y + 1) - Duration::nanoseconds(1)),
            Window::TrailingDays(d) => (snapshot - Duration::days(d as i64), snapshot),
        }
    }

    fn contains(self, dataset: &GovernanceDataset, at: DateTime<Utc>) -> bool {
        let (start, end) = self.bounds(dataset);
        start <= at && at <= end
    }
}

/// Decided proposals in the window, each with its (voter, weight) list.
fn decided_with_votes<'a>(
    dataset: &'a GovernanceDataset,
    window: Window,
) -> Vec<(&'a Proposal, Vec<(&'a Address, TokenAmount)>)> {
    let mut votes: BTreeMap<u64, Vec<(&Address, TokenAmount)>> = BTreeMap::new();
    for v in &dataset.votes {
        votes.entry(v.proposal_id).or_default().push((&v.voter, v.weight));
    }
    let mut proposals: Vec<&Proposal> = dataset
        .proposals
        .iter()
        .filter(|p| p.status.is_decided() && window.contains(dataset, p.submitted_at))
        .collect();
    proposals.sort_by_key(|p| p.id);
    proposals
        .into_iter()
        .filter_map(|p| votes.remove(&p.id).map(|v| (p, v)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipationStats {
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
    pub proposals_total: usize,
    pub general_proposals: usize,
    pub avg_addresses_per_proposal: f64,
    /// Mean cast weight per proposal, truncated at atom resolution.
    pub avg_active_weight: TokenAmount,
    pub float_participation_pct: f64,
    pub turnout_by_year: BTreeMap<i32, f64>,
    pub proposals_per_month: f64,
}

/// Turnout statistics over decided proposals with at least one vote.
pub fn participation(dataset: &GovernanceDataset, window: Window) -> Result<ParticipationStats, MetricError> {
    let decided = decided_with_votes(dataset, window);
    if decided.is_empty() {
        return Err(MetricError::EmptyWindow);
    }
    let count = decided.len();

    let mut voters_total = 0usize;
    let mut weight_total = TokenAmount::ZERO;
    let mut by_year: BTreeMap<i32, (usize, usize)> = BTreeMap::new();
    for (p, votes) in &decided {
        let distinct: BTreeSet<&Address> = votes.iter().map(|(a, _)| *a).collect();
        voters_total += distinct.len();
        weight_total = TokenAmount::checked_sum(votes.iter().map(|(_, w)| *w).chain([weight_total]))?;
        let slot = by_year.entry(p.submitted_at.year()).or_default();
        slot.0 += distinct.len();
        slot.1 += 1;
    }

    let circulating = dataset.allocation.circulating.atoms();
    let float_participation_pct = match circulating.checked_mul(count as u128) {
        Some(den) if den > 0 => (ratio(weight_total.atoms(), den) * 100.0).min(100.0),
        Some(_) => 0.0,
        None => (weight_total.to_f64() / count as f64 / dataset.allocation.circulating.to_f64() * 100.0).min(100.0),
    };

    let (start, end) = window.bounds(dataset);
    let span_start = start.max(dataset.lifetime_start());
    let span_end = end.min(dataset.meta.snapshot_time);
    let months = (span_end - span_start).num_seconds().max(0) as f64 / 86_400.0 / DAYS_PER_MONTH;

    Ok(ParticipationStats {
        window_start: start,
        window_end: end,
        proposals_total: count,
        general_proposals: decided.iter().filter(|(p, _)| p.is_general).count(),
        avg_addresses_per_proposal: voters_total as f64 / count as f64,
        avg_active_weight: weight_total.div_floor(count as u64)?,
        float_participation_pct,
        turnout_by_year: by_year
            .into_iter()
            .map(|(y, (voters, n))| (y, voters as f64 / n as f64))
            .collect(),
        proposals_per_month: if months > 0.0 { count as f64 / months } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalDecisiveness {
    pub proposal_id: u64,
    pub voters: usize,
    pub cast_weight: TokenAmount,
    pub top_k_weight: TokenAmount,
    pub top_k_share_pct: f64,
    pub top_k_vias: usize,
    pub decisive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decisiveness {
    pub k: usize,
    pub proposals: usize,
    pub decided_by_top_k: usize,
    pub fraction: f64,
    pub per_proposal: Vec<ProposalDecisiveness>,
}

/// Fraction of decided proposals on which the `k` heaviest voters together
/// cast strictly more than half of the weight.
pub fn decisiveness(
    dataset: &GovernanceDataset,
    profiles: &[AgentProfile],
    window: Window,
    k: usize,
) -> Result<Decisiveness, MetricError> {
    let classes = ClassIndex::new(profiles);
    let decided = decided_with_votes(dataset, window);
    if decided.is_empty() {
        return Err(MetricError::EmptyWindow);
    }
    let mut per_proposal = Vec::with_capacity(decided.len());
    for (p, mut votes) in decided {
        votes.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let cast = TokenAmount::checked_sum(votes.iter().map(|(_, w)| *w))?;
        let top = TokenAmount::checked_sum(votes.iter().take(k).map(|(_, w)| *w))?;
        // top > cast / 2  ⇔  2·top > cast
        let decisive = top.checked_mul_int(2)? > cast;
        per_proposal.push(ProposalDecisiveness {
            proposal_id: p.id,
            voters: votes.len(),
            cast_weight: cast,
            top_k_weight: top,
            top_k_share_pct: top.percent_of(cast).unwrap_or(0.0),
            top_k_vias: votes.iter().take(k).filter(|(a, _)| classes.is_via(a)).count(),
            decisive,
        });
    }
    let decided_by_top_k = per_proposal.iter().filter(|p| p.decisive).count();
    Ok(Decisiveness {
        k,
        proposals: per_proposal.len(),
        decided_by_top_k,
        fraction: decided_by_top_k as f64 / per_proposal.len() as f64,
        per_proposal,
    })
}
