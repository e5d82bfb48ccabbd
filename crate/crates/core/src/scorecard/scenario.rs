//! What-if transforms over a dataset. Every transform is pure.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Address, BalanceRecord, DelegationEdge, GovernanceDataset, GroupCategory, ModelError, TokenAmount,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapabilityFlag {
    CanFreezeBalances,
    CanUpgradeCode,
    PauseGuardianFullShutdown,
    PauseGuardianCommunityControlled,
}

impl CapabilityFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CapabilityFlag::CanFreezeBalances => "can_freeze_balances",
            CapabilityFlag::CanUpgradeCode => "can_upgrade_code",
            CapabilityFlag::PauseGuardianFullShutdown => "pause_guardian_full_shutdown",
            CapabilityFlag::PauseGuardianCommunityControlled => "pause_guardian_community_controlled",
        }
    }
}

impl FromStr for CapabilityFlag {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            CapabilityFlag::CanFreezeBalances,
            CapabilityFlag::CanUpgradeCode,
            CapabilityFlag::PauseGuardianFullShutdown,
            CapabilityFlag::PauseGuardianCommunityControlled,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| ScenarioError::UnknownFlag(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    /// Every insider group's unvested allocation lands with its holders.
    VestingComplete,
    /// Delegations to `address` return to their delegators.
    RemoveDelegate { address: Address },
    /// `address` splits its balance equally across itself and `parts - 1`
    /// fresh addresses.
    SplitWhale { address: Address, parts: u32 },
    /// Flips a capability. Switching an agent-counted power on uses
    /// `agent_count`, default 1.
    ToggleCapability {
        flag: CapabilityFlag,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent_count: Option<u32>,
    },
    SetOpposition { amount: TokenAmount },
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioSpec::VestingComplete => write!(f, "vesting_complete"),
            ScenarioSpec::RemoveDelegate { address } => write!(f, "remove_delegate:{address}"),
            ScenarioSpec::SplitWhale { address, parts } => write!(f, "split_whale:{address}:{parts}"),
            ScenarioSpec::ToggleCapability { flag, agent_count: None } => {
                write!(f, "toggle_capability:{}", flag.as_str())
            }
            ScenarioSpec::ToggleCapability { flag, agent_count: Some(n) } => {
                write!(f, "toggle_capability:{}:{n}", flag.as_str())
            }
            ScenarioSpec::SetOpposition { amount } => write!(f, "set_opposition:{amount}"),
        }
    }
}

/// Parses the compact `kind[:arg[:arg]]` form, or a JSON object.
impl FromStr for ScenarioSpec {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| ScenarioError::Parse(e.to_string()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let address = |a: &str| a.parse::<Address>().map_err(ScenarioError::from);
        let count = |n: &str| n.parse::<u32>().map_err(|_| ScenarioError::Parse(format!("not a count: {n}")));
        match parts.as_slice() {
            ["vesting_complete"] => Ok(ScenarioSpec::VestingComplete),
            ["remove_delegate", a] => Ok(ScenarioSpec::RemoveDelegate { address: address(a)? }),
            ["split_whale", a, n] => Ok(ScenarioSpec::SplitWhale { address: address(a)?, parts: count(n)? }),
            ["toggle_capability", flag] => Ok(ScenarioSpec::ToggleCapability { flag: flag.parse()?, agent_count: None }),
            ["toggle_capability", flag, n] => Ok(ScenarioSpec::ToggleCapability {
                flag: flag.parse()?,
                agent_count: Some(count(n)?),
            }),
            ["set_opposition", amount] => Ok(ScenarioSpec::SetOpposition { amount: amount.parse()? }),
            _ => Err(ScenarioError::Parse(format!("unrecognised scenario: {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown address: {0}")]
    UnknownAddress(Address),
    #[error("{0} has no delegations to remove")]
    NotADelegate(Address),
    #[error("split needs at least 2 parts, got {0}")]
    InvalidParts(u32),
    #[error("split address {0} already exists")]
    AddressCollision(Address),
    #[error("unknown capability flag: {0}")]
    UnknownFlag(String),
    #[error("dataset has no pause guardian")]
    NoPauseGuardian,
    #[error("invalid scenario: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn apply_scenarios(dataset: &GovernanceDataset, specs: &[ScenarioSpec]) -> Result<GovernanceDataset, ScenarioError> {
    let mut out = dataset.clone();
    for spec in specs {
        out = apply_scenario(&out, spec)?;
    }
    Ok(out)
}

pub fn apply_scenario(dataset: &GovernanceDataset, spec: &ScenarioSpec) -> Result<GovernanceDataset, ScenarioError> {
    let mut ds = dataset.clone();
    match spec {
        ScenarioSpec::VestingComplete => vesting_complete(&mut ds)?,
        ScenarioSpec::RemoveDelegate { address } => {
            if ds.balance_of(address).is_none() {
                return Err(ScenarioError::UnknownAddress(address.clone()));
            }
            let before = ds.delegations.len();
            ds.delegations.retain(|d| &d.delegatee != address);
            if ds.delegations.len() == before {
                return Err(ScenarioError::NotADelegate(address.clone()));
            }
        }
        ScenarioSpec::SplitWhale { address, parts } => split_whale(&mut ds, address, *parts)?,
        ScenarioSpec::ToggleCapability { flag, agent_count } => {
            let caps = &mut ds.capabilities;
            let toggle = |on: &mut bool, count: &mut Option<u32>| {
                *on = !*on;
                *count = on.then_some(agent_count.unwrap_or(1));
            };
            match flag {
                CapabilityFlag::CanFreezeBalances => toggle(&mut caps.can_freeze_balances, &mut caps.freeze_agent_count),
                CapabilityFlag::CanUpgradeCode => toggle(&mut caps.can_upgrade_code, &mut caps.upgrade_agent_count),
                CapabilityFlag::PauseGuardianFullShutdown => {
                    let g = caps.pause_guardian.as_mut().ok_or(ScenarioError::NoPauseGuardian)?;
                    g.is_full_shutdown = !g.is_full_shutdown;
                }
                CapabilityFlag::PauseGuardianCommunityControlled => {
                    let g = caps.pause_guardian.as_mut().ok_or(ScenarioError::NoPauseGuardian)?;
                    g.community_controlled = !g.community_controlled;
                }
            }
        }
        ScenarioSpec::SetOpposition { amount } => ds.params.assumed_opposition = Some(*amount),
    }
    Ok(ds)
}

/// Credits each insider group's unvested remainder (allocation minus what
/// its holders already hold) to those holders in equal shares and moves it
/// into circulation. Groups without listed holders are left unchanged.
fn vesting_complete(ds: &mut GovernanceDataset) -> Result<(), ScenarioError> {
    let mut released = TokenAmount::ZERO;
    let groups: Vec<_> = ds
        .allocation
        .groups
        .iter()
        .filter(|g| g.category == GroupCategory::Insider && !g.holders.is_empty())
        .cloned()
        .collect();
    for g in groups {
        let holders: BTreeSet<&Address> = g.holders.iter().collect();
        for h in &holders {
            if ds.balance_of(h).is_none() {
                return Err(ScenarioError::UnknownAddress((*h).clone()));
            }
        }
        let held = TokenAmount::checked_sum(
            ds.balances.iter().filter(|b| holders.contains(&b.address)).map(|b| b.balance),
        )?;
        let Ok(unvested) = g.allocation.checked_sub(held) else { continue };
        if unvested.is_zero() {
            continue;
        }
        let shares = unvested.split_exact(holders.len() as u32)?;
        for (h, share) in holders.iter().zip(shares) {
            let rec = ds.balances.iter_mut().find(|b| &b.address == *h).expect("checked above");
            rec.balance = rec.balance.checked_add(share)?;
        }
        released = released.checked_add(unvested)?;
    }
    let circulating = ds.allocation.circulating.checked_add(released)?;
    ds.allocation.circulating = circulating.min(ds.allocation.max_supply);
    ds.allocation.vesting_end = None;
    Ok(())
}

/// Address of the `index`-th fresh part when splitting `address`.
pub(crate) fn split_address(address: &Address, index: u32) -> Address {
    Address::derived(&format!("split:{address}:{index}"))
}

/// The original address keeps part 0, which absorbs rounding remainders;
/// parts 1.. go to fresh derived addresses. Each outgoing delegation is
/// split the same way, then shifted between parts where the original would
/// otherwise delegate more than it holds. Per-delegatee totals never change.
fn split_whale(ds: &mut GovernanceDataset, address: &Address, parts: u32) -> Result<(), ScenarioError> {
    if parts < 2 {
        return Err(ScenarioError::InvalidParts(parts));
    }
    let idx = ds
        .balances
        .iter()
        .position(|b| &b.address == address)
        .ok_or_else(|| ScenarioError::UnknownAddress(address.clone()))?;
    let fresh: Vec<Address> = (1..parts).map(|i| split_address(address, i)).collect();
    let known = ds.known_addresses();
    if let Some(c) = fresh.iter().find(|a| known.contains(*a)) {
        return Err(ScenarioError::AddressCollision(c.clone()));
    }

    let p = parts as u64;
    let original = ds.balances[idx].clone();
    let part_balance = original.balance.div_floor(p)?;
    let keep_balance = original.balance.checked_sub(part_balance.checked_mul_int(p as u128 - 1)?)?;

    let (outgoing, rest): (Vec<DelegationEdge>, Vec<DelegationEdge>) =
        ds.delegations.drain(..).partition(|d| &d.delegator == address);
    let mut keep: Vec<TokenAmount> = Vec::with_capacity(outgoing.len());
    let mut moved: Vec<Vec<TokenAmount>> = vec![Vec::with_capacity(outgoing.len()); fresh.len()];
    for e in &outgoing {
        let share = e.amount.div_floor(p)?;
        keep.push(e.amount.checked_sub(share.checked_mul_int(p as u128 - 1)?)?);
        for m in &mut moved {
            m.push(share);
        }
    }
    let kept_out = TokenAmount::checked_sum(keep.iter().copied())?;
    let mut deficit = kept_out.checked_sub(keep_balance).unwrap_or(TokenAmount::ZERO);
    for m in &mut moved {
        let mut slack = part_balance.checked_sub(TokenAmount::checked_sum(m.iter().copied())?)?;
        for (j, amt) in m.iter_mut().enumerate() {
            let shift = deficit.min(slack).min(keep[j]);
            if shift.is_zero() {
                continue;
            }
            keep[j] = keep[j].checked_sub(shift)?;
            *amt = amt.checked_add(shift)?;
            slack = slack.checked_sub(shift)?;
            deficit = deficit.checked_sub(shift)?;
        }
    }
    debug_assert!(deficit.is_zero());

    ds.balances[idx].balance = keep_balance;
    let new_records = fresh.iter().map(|a| BalanceRecord {
        address: a.clone(),
        balance: part_balance,
        is_contract: original.is_contract,
    });
    ds.balances.splice(idx + 1..idx + 1, new_records);

    let mut delegations = rest;
    for (e, amount) in outgoing.iter().zip(&keep) {
        if !amount.is_zero() {
            delegations.push(DelegationEdge { amount: *amount, ..e.clone() });
        }
    }
    for (a, m) in fresh.iter().zip(&moved) {
        for (e, amount) in outgoing.iter().zip(m) {
            if !amount.is_zero() {
                delegations.push(DelegationEdge {
                    delegator: a.clone(),
                    delegatee: if &e.delegatee == address { a.clone() } else { e.delegatee.clone() },
                    amount: *amount,
                });
            }
        }
    }
    ds.delegations = delegations;
    Ok(())
}
