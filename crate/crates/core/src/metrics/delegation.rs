//! Effective voting power and delegation concentration.
//!
//! Delegating moves power: an address's effective power is its own balance,
//! minus everything it delegates away, plus everything delegated to it.
//! Contract-held balances are not counted as voting power.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{MetricError, WeightVector};
use crate::model::{Address, GovernanceDataset, TokenAmount};
use crate::taxonomy::{AgentProfile, ClassIndex};

/// Coverage points reported by [`delegation_stats`].
pub const DEFAULT_TOP_NS: [usize; 6] = [1, 5, 10, 20, 60, 100];

/// Effective voting power of every address that appears in a balance record
/// or delegation edge.
pub fn effective_voting_power(
    dataset: &GovernanceDataset,
) -> Result<BTreeMap<Address, TokenAmount>, MetricError> {
    let mut power: BTreeMap<Address, TokenAmount> = BTreeMap::new();
    for b in &dataset.balances {
        let slot = power.entry(b.address.clone()).or_default();
        *slot = slot.checked_add(b.balance)?;
    }
    for d in &dataset.delegations {
        let from = power.entry(d.delegator.clone()).or_default();
        *from = from.checked_sub(d.amount).map_err(|_| {
            MetricError::InvalidDataset(format!("{} delegates more than it holds", d.delegator))
        })?;
    }
    for d in &dataset.delegations {
        let to = power.entry(d.delegatee.clone()).or_default();
        *to = to.checked_add(d.amount)?;
    }
    Ok(power)
}

fn contract_set(dataset: &GovernanceDataset) -> BTreeSet<&Address> {
    dataset
        .balances
        .iter()
        .filter(|b| b.is_contract)
        .map(|b| &b.address)
        .collect()
}

/// Effective voting power of non-contract VIAs, as a weight vector keyed by
/// address.
pub fn via_power_vector(
    dataset: &GovernanceDataset,
    profiles: &[AgentProfile],
) -> Result<WeightVector, MetricError> {
    let classes = ClassIndex::new(profiles);
    let contracts = contract_set(dataset);
    let entries = effective_voting_power(dataset)?
        .into_iter()
        .filter(|(a, _)| !contracts.contains(a) && classes.is_via(a))
        .map(|(a, p)| (a.to_string(), p))
        .collect();
    WeightVector::new(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelegationStats {
    pub delegated_total: TokenAmount,
    pub total_voting_power: TokenAmount,
    pub delegated_share_pct: f64,
    pub delegatee_count: usize,
    /// N → share of delegated power held by the N largest delegatees.
    pub top_n_coverage: BTreeMap<usize, f64>,
    pub distinct_via_delegates: usize,
}

pub fn delegation_stats(
    dataset: &GovernanceDataset,
    profiles: &[AgentProfile],
) -> Result<DelegationStats, MetricError> {
    delegation_stats_for(dataset, profiles, &DEFAULT_TOP_NS)
}

pub fn delegation_stats_for(
    dataset: &GovernanceDataset,
    profiles: &[AgentProfile],
    top_ns: &[usize],
) -> Result<DelegationStats, MetricError> {
    let classes = ClassIndex::new(profiles);
    let contracts = contract_set(dataset);

    let total_voting_power = TokenAmount::checked_sum(
        effective_voting_power(dataset)?
            .into_iter()
            .filter(|(a, _)| !contracts.contains(a))
            .map(|(_, p)| p),
    )?;

    let mut delegated_in: BTreeMap<&Address, TokenAmount> = BTreeMap::new();
    for d in dataset.delegations.iter().filter(|d| !contracts.contains(&d.delegatee)) {
        let slot = delegated_in.entry(&d.delegatee).or_default();
        *slot = slot.checked_add(d.amount)?;
    }
    delegated_in.retain(|_, a| !a.is_zero());
    let delegated_total = TokenAmount::checked_sum(delegated_in.values().copied())?;

    let mut ranked: Vec<(&Address, TokenAmount)> = delegated_in.iter().map(|(a, p)| (*a, *p)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut top_n_coverage = BTreeMap::new();
    if !delegated_total.is_zero() {
        for &n in top_ns {
            let top = TokenAmount::checked_sum(ranked.iter().take(n).map(|(_, p)| *p))?;
            top_n_coverage.insert(n, top.percent_of(delegated_total).unwrap_or(0.0));
        }
    }

    Ok(DelegationStats {
        delegated_total,
        total_voting_power,
        delegated_share_pct: delegated_total
            .percent_of(total_voting_power)
            .unwrap_or(0.0)
            .min(100.0),
        delegatee_count: ranked.len(),
        top_n_coverage,
        distinct_via_delegates: ranked.iter().filter(|(a, _)| classes.is_via(a)).count(),
    })
}
