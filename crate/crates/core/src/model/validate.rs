use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Address, GovernanceDataset, TokenAmount};

/// Tolerance, in percentage points, for allocation percentages.
const PCT_TOLERANCE: f64 = 0.01 + 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    /// Record locator built from keys (addresses, ids, names), never from
    /// row positions, so reports do not depend on record order.
    pub path: String,
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rules(&self) -> BTreeSet<&str> {
        self.violations.iter().map(|v| v.rule.as_str()).collect()
    }
}

struct Collector(BTreeSet<Violation>);

impl Collector {
    fn push(&mut self, path: impl Into<String>, rule: &str, message: impl Into<String>) {
        self.0.insert(Violation {
            path: path.into(),
            rule: rule.to_string(),
            message: message.into(),
        });
    }
}

/// Checks every cross-record invariant of a dataset. Violations are data; the
/// report is sorted and independent of record order.
pub fn validate_dataset(ds: &GovernanceDataset) -> ValidationReport {
    let mut out = Collector(BTreeSet::new());

    let mut balances: BTreeMap<&Address, TokenAmount> = BTreeMap::new();
    for b in &ds.balances {
        if balances.insert(&b.address, b.balance).is_some() {
            out.push(
                format!("balances/{}", b.address),
                "duplicate-balance-record",
                "address has more than one balance record",
            );
        }
    }

    check_delegations(ds, &balances, &mut out);
    check_proposals_and_votes(ds, &balances, &mut out);
    check_allocation(ds, &balances, &mut out);

    if ds.params.quorum.is_zero() {
        out.push("params/quorum", "quorum-not-positive", "quorum must be greater than zero");
    }

    let caps = &ds.capabilities;
    if caps.can_freeze_balances != caps.freeze_agent_count.is_some() {
        out.push(
            "capabilities/freeze_agent_count",
            "capability-agent-count",
            "freeze_agent_count must be present exactly when can_freeze_balances is true",
        );
    }
    if caps.can_upgrade_code != caps.upgrade_agent_count.is_some() {
        out.push(
            "capabilities/upgrade_agent_count",
            "capability-agent-count",
            "upgrade_agent_count must be present exactly when can_upgrade_code is true",
        );
    }

    let mut seen = BTreeSet::new();
    for e in &ds.agent_evidence {
        let path = format!("agents/{}", e.address);
        if !seen.insert(&e.address) {
            out.push(path.clone(), "duplicate-evidence", "address has more than one evidence record");
        }
        if !(0.0..=1.0).contains(&e.active_days_fraction) {
            out.push(path, "evidence-fraction-range", "active_days_fraction must lie in [0, 1]");
        }
    }

    ValidationReport {
        violations: out.0.into_iter().collect(),
    }
}

fn check_delegations(
    ds: &GovernanceDataset,
    balances: &BTreeMap<&Address, TokenAmount>,
    out: &mut Collector,
) {
    let mut outgoing: BTreeMap<&Address, (usize, Option<TokenAmount>)> = BTreeMap::new();
    for d in &ds.delegations {
        let path = format!("delegations/{}->{}", d.delegator, d.delegatee);
        for (role, addr) in [("delegator", &d.delegator), ("delegatee", &d.delegatee)] {
            if !balances.contains_key(addr) {
                out.push(path.clone(), "unknown-address", format!("{role} {addr} has no balance record"));
            }
        }
        let balance = balances.get(&d.delegator).copied().unwrap_or_default();
        if d.amount > balance {
            out.push(
                path,
                "delegation-exceeds-balance",
                format!("delegates {} but holds {}", d.amount, balance),
            );
        }
        let entry = outgoing.entry(&d.delegator).or_insert((0, Some(TokenAmount::ZERO)));
        entry.0 += 1;
        entry.1 = entry.1.and_then(|acc| acc.checked_add(d.amount).ok());
    }
    for (delegator, (edges, total)) in outgoing {
        if edges < 2 {
            continue;
        }
        let balance = balances.get(delegator).copied().unwrap_or_default();
        if total.is_none_or(|t| t > balance) {
            out.push(
                format!("delegations/{delegator}"),
                "delegated-total-exceeds-balance",
                format!("total delegated exceeds balance {balance}"),
            );
        }
    }
}

fn check_proposals_and_votes(
    ds: &GovernanceDataset,
    balances: &BTreeMap<&Address, TokenAmount>,
    out: &mut Collector,
) {
    let mut by_id = BTreeMap::new();
    for p in &ds.proposals {
        let path = format!("proposals/{}", p.id);
        if p.id == 0 {
            out.push(path.clone(), "proposal-id-not-positive", "proposal ids start at 1");
        }
        if by_id.insert(p.id, p.submitted_at).is_some() {
            out.push(path, "duplicate-proposal-id", "proposal id used more than once");
        }
    }
    let mut prev: Option<(u64, chrono::DateTime<chrono::Utc>)> = None;
    for (&id, &at) in &by_id {
        if let Some((prev_id, prev_at)) = prev {
            if at < prev_at {
                out.push(
                    format!("proposals/{id}"),
                    "proposal-order",
                    format!("submitted before proposal {prev_id}"),
                );
            }
        }
        prev = Some((id, at));
    }

    let mut seen = BTreeSet::new();
    for v in &ds.votes {
        let path = format!("votes/{}/{}", v.proposal_id, v.voter);
        if !by_id.contains_key(&v.proposal_id) {
            out.push(path.clone(), "vote-unknown-proposal", "vote references an unknown proposal");
        }
        if !balances.contains_key(&v.voter) {
            out.push(path.clone(), "unknown-address", format!("voter {} has no balance record", v.voter));
        }
        if !seen.insert((v.proposal_id, &v.voter)) {
            out.push(path.clone(), "duplicate-vote", "voter voted more than once on this proposal");
        }
        if v.weight.is_zero() {
            out.push(path, "vote-weight-zero", "vote weight must be positive");
        }
    }
}

fn check_allocation(
    ds: &GovernanceDataset,
    balances: &BTreeMap<&Address, TokenAmount>,
    out: &mut Collector,
) {
    let alloc = &ds.allocation;
    if alloc.circulating > alloc.max_supply {
        out.push(
            "allocation/circulating",
            "circulating-exceeds-max-supply",
            format!("circulating {} exceeds max supply {}", alloc.circulating, alloc.max_supply),
        );
    }

    let total = TokenAmount::checked_sum(alloc.groups.iter().map(|g| g.allocation));
    if total.as_ref().ok() != Some(&alloc.max_supply) {
        out.push(
            "allocation/groups",
            "allocation-sum-mismatch",
            "group allocations do not sum to max supply",
        );
    }
    if !alloc.groups.is_empty() {
        let pct_sum: f64 = alloc.groups.iter().map(|g| g.pct_of_max_supply).sum();
        if (pct_sum - 100.0).abs() > PCT_TOLERANCE {
            out.push(
                "allocation/groups",
                "allocation-pct-sum",
                format!("group percentages sum to {pct_sum:.4}, expected 100.00"),
            );
        }
    }

    let mut names = BTreeSet::new();
    for g in &alloc.groups {
        let path = format!("allocation/groups/{}", g.name);
        if !names.insert(g.name.as_str()) {
            out.push(path.clone(), "duplicate-group-name", "group name used more than once");
        }
        let implied = g.allocation.percent_of(alloc.max_supply).unwrap_or(0.0);
        if !g.pct_of_max_supply.is_finite() || (implied - g.pct_of_max_supply).abs() > PCT_TOLERANCE {
            out.push(
                path.clone(),
                "group-pct-inconsistent",
                format!("stated {} but allocation implies {implied:.4}", g.pct_of_max_supply),
            );
        }
        for h in &g.holders {
            if !balances.contains_key(h) {
                out.push(
                    format!("{path}/holders/{h}"),
                    "unknown-address",
                    "group holder has no balance record",
                );
            }
        }
    }

    if !alloc.inflation_streams.is_empty() {
        let streams = TokenAmount::checked_sum(alloc.inflation_streams.iter().map(|s| s.daily_amount));
        if streams.ok() != Some(alloc.daily_inflation) {
            out.push(
                "allocation/inflation_streams",
                "inflation-streams-mismatch",
                "inflation streams do not sum to daily_inflation",
            );
        }
    }

    if !alloc.max_supply.is_zero() {
        let held = TokenAmount::checked_sum(balances.values().copied());
        if held.is_err() || held.is_ok_and(|h| h > alloc.max_supply) {
            out.push(
                "balances",
                "balances-exceed-max-supply",
                "balances sum to more than the maximum supply",
            );
        }
    }
}
