//! Domain types shared by every stage of the engine.
//!
//! Everything here is plain data: immutable once built, `Send + Sync`, and
//! serializable in the field order used by the on-disk bundle format.

mod address;
mod amount;
mod characteristic;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use address::Address;
pub use amount::{TokenAmount, DECIMALS};
pub(crate) use amount::ratio;
pub use characteristic::{Basis, CharacteristicId, Dimension};
pub use validate::{validate_dataset, ValidationReport, Violation};

use crate::taxonomy::AgentEvidence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid address: {0:?}")]
    InvalidAddress(String),
    #[error("invalid token amount: {0:?}")]
    InvalidAmount(String),
    #[error("negative token amount: {0:?}")]
    NegativeAmount(String),
    #[error("token amount has more than 18 fractional digits: {0:?}")]
    PrecisionLoss(String),
    #[error("token amount overflow")]
    AmountOverflow,
    #[error("token amount underflow")]
    AmountUnderflow,
    #[error("division by zero")]
    ZeroDivisor,
    #[error("unknown characteristic: {0:?}")]
    UnknownCharacteristic(String),
    #[error("score {0} out of range (1-5)")]
    ScoreOutOfRange(u8),
    #[error("{0} is scored quantitatively and takes no qualitative entry")]
    NotQualitative(CharacteristicId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceRecord {
    pub address: Address,
    pub balance: TokenAmount,
    pub is_contract: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelegationEdge {
    pub delegator: Address,
    pub delegatee: Address,
    pub amount: TokenAmount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalStatus {
    Pending,
    Active,
    Succeeded,
    Defeated,
    Canceled,
    Executed,
}

impl ProposalStatus {
    /// Voting has closed, whatever the outcome. Canceled proposals count.
    pub fn is_decided(self) -> bool {
        !matches!(self, ProposalStatus::Pending | ProposalStatus::Active)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProposalStatus::Pending => "pending",
            ProposalStatus::Active => "active",
            ProposalStatus::Succeeded => "succeeded",
            ProposalStatus::Defeated => "defeated",
            ProposalStatus::Canceled => "canceled",
            ProposalStatus::Executed => "executed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub id: u64,
    pub submitted_at: DateTime<Utc>,
    pub status: ProposalStatus,
    pub is_general: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    For,
    Against,
    Abstain,
}

impl Support {
    pub fn as_str(self) -> &'static str {
        match self {
            Support::For => "for",
            Support::Against => "against",
            Support::Abstain => "abstain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub proposal_id: u64,
    pub voter: Address,
    pub support: Support,
    pub weight: TokenAmount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupCategory {
    Insider,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StakeholderGroup {
    pub name: String,
    pub category: GroupCategory,
    pub allocation: TokenAmount,
    pub pct_of_max_supply: f64,
    /// Addresses currently holding this group's vested tokens. Used by the
    /// vesting scenario; may be empty.
    #[serde(default)]
    pub holders: Vec<Address>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecipientClass {
    #[serde(rename = "A_external")]
    AExternal,
    #[serde(rename = "B_insider")]
    BInsider,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InflationStream {
    pub label: String,
    pub daily_amount: TokenAmount,
    pub recipient_class: RecipientClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSchedule {
    pub max_supply: TokenAmount,
    pub circulating: TokenAmount,
    pub groups: Vec<StakeholderGroup>,
    pub vesting_end: Option<NaiveDate>,
    pub daily_inflation: TokenAmount,
    pub inflation_streams: Vec<InflationStream>,
}

impl AllocationSchedule {
    pub fn empty() -> Self {
        AllocationSchedule {
            max_supply: TokenAmount::ZERO,
            circulating: TokenAmount::ZERO,
            groups: Vec::new(),
            vesting_end: None,
            daily_inflation: TokenAmount::ZERO,
            inflation_streams: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GovernanceParams {
    pub proposal_threshold: TokenAmount,
    pub autonomous_proposal_bond: TokenAmount,
    pub quorum: TokenAmount,
    pub review_period_days: u32,
    pub voting_period_days: u32,
    pub queue_period_days: u32,
    /// Voting weight assumed to oppose a general proposal; `None` means
    /// only the quorum has to be met.
    #[serde(default)]
    pub assumed_opposition: Option<TokenAmount>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauseGuardian {
    pub holder_count: u32,
    pub pausable_functions: Vec<String>,
    pub is_full_shutdown: bool,
    pub community_controlled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityFlags {
    pub can_freeze_balances: bool,
    pub freeze_agent_count: Option<u32>,
    pub can_upgrade_code: bool,
    pub upgrade_agent_count: Option<u32>,
    pub pause_guardian: Option<PauseGuardian>,
}

impl CapabilityFlags {
    pub fn none() -> Self {
        CapabilityFlags {
            can_freeze_balances: false,
            freeze_agent_count: None,
            can_upgrade_code: false,
            upgrade_agent_count: None,
            pause_guardian: None,
        }
    }
}

/// Business-model tag. Metadata only; never read by scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DaoCategory {
    Media,
    OperatingSystem,
    Social,
    Protocol,
    Collector,
    Investment,
    Impact,
    Service,
    Grants,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub snapshot_time: DateTime<Utc>,
    pub dao_name: String,
    pub dao_category: Option<DaoCategory>,
    /// Start of the DAO's operating life, used as the denominator for
    /// per-month rates. Falls back to the first proposal when absent.
    #[serde(default)]
    pub launched_at: Option<DateTime<Utc>>,
}

/// One immutable governance snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct GovernanceDataset {
    pub meta: DatasetMeta,
    pub balances: Vec<BalanceRecord>,
    pub delegations: Vec<DelegationEdge>,
    pub proposals: Vec<Proposal>,
    pub votes: Vec<VoteRecord>,
    pub allocation: AllocationSchedule,
    pub params: GovernanceParams,
    pub capabilities: CapabilityFlags,
    pub agent_evidence: Vec<AgentEvidence>,
}

impl GovernanceDataset {
    pub fn balance_map(&self) -> BTreeMap<&Address, &BalanceRecord> {
        self.balances.iter().map(|b| (&b.address, b)).collect()
    }

    pub fn balance_of(&self, address: &Address) -> Option<&BalanceRecord> {
        self.balances.iter().find(|b| &b.address == address)
    }

    /// Addresses with a balance record or an evidence record.
    pub fn known_addresses(&self) -> BTreeSet<Address> {
        self.balances
            .iter()
            .map(|b| b.address.clone())
            .chain(self.agent_evidence.iter().map(|e| e.address.clone()))
            .collect()
    }

    pub fn proposal(&self, id: u64) -> Option<&Proposal> {
        self.proposals.iter().find(|p| p.id == id)
    }

    /// Start of the lifetime window: `launched_at`, else the first proposal,
    /// else the snapshot itself.
    pub fn lifetime_start(&self) -> DateTime<Utc> {
        self.meta
            .launched_at
            .or_else(|| self.proposals.iter().map(|p| p.submitted_at).min())
            .unwrap_or(self.meta.snapshot_time)
    }
}

/// An assessor's score for a qualitative or mixed characteristic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualitativeEntry {
    pub characteristic: CharacteristicId,
    pub score: u8,
    pub evidence: String,
    pub assessor: String,
    pub entered_at: DateTime<Utc>,
}

impl QualitativeEntry {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(1..=5).contains(&self.score) {
            return Err(ModelError::ScoreOutOfRange(self.score));
        }
        if self.characteristic.basis() == Basis::Quantitative {
            return Err(ModelError::NotQualitative(self.characteristic));
        }
        Ok(())
    }
}
