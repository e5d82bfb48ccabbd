use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// The five assessment dimensions, in their fixed reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dimension {
    /// Token-weighted voting and incentives.
    T,
    /// Infrastructure.
    I,
    /// Governance.
    G,
    /// Escalation.
    E,
    /// Reputation.
    R,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [Dimension::T, Dimension::I, Dimension::G, Dimension::E, Dimension::R];

    pub fn label(self) -> &'static str {
        match self {
            Dimension::T => "T",
            Dimension::I => "I",
            Dimension::G => "G",
            Dimension::E => "E",
            Dimension::R => "R",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Dimension::T => "Token weighted voting and incentives",
            Dimension::I => "Infrastructure",
            Dimension::G => "Governance",
            Dimension::E => "Escalation",
            Dimension::R => "Reputation",
        }
    }

    pub fn characteristics(self) -> [CharacteristicId; 3] {
        use CharacteristicId::*;
        match self {
            Dimension::T => [TokenDistribution, NonCollusiveOligopoly, VotingPowerConcentration],
            Dimension::I => [TokenFreezeThaw, CodeUpgrades, Access],
            Dimension::G => [VotingDelegation, VotingParticipation, Bootstrapping],
            Dimension::E => [CrisisManagement, Inflation, VotingAccess],
            Dimension::R => [SoftPower, ResponsibilityAlignment, Accountability],
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How a characteristic's score is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Quantitative,
    Qualitative,
    /// Computed sub-scores, optionally capped by an assessor entry.
    Mixed,
}

/// The fifteen questionnaire characteristics, three per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacteristicId {
    TokenDistribution,
    NonCollusiveOligopoly,
    VotingPowerConcentration,
    TokenFreezeThaw,
    CodeUpgrades,
    Access,
    VotingDelegation,
    VotingParticipation,
    Bootstrapping,
    CrisisManagement,
    Inflation,
    VotingAccess,
    SoftPower,
    ResponsibilityAlignment,
    Accountability,
}

impl CharacteristicId {
    /// All fifteen ids in questionnaire order (T, I, G, E, R).
    pub const ALL: [CharacteristicId; 15] = [
        CharacteristicId::TokenDistribution,
        CharacteristicId::NonCollusiveOligopoly,
        CharacteristicId::VotingPowerConcentration,
        CharacteristicId::TokenFreezeThaw,
        CharacteristicId::CodeUpgrades,
        CharacteristicId::Access,
        CharacteristicId::VotingDelegation,
        CharacteristicId::VotingParticipation,
        CharacteristicId::Bootstrapping,
        CharacteristicId::CrisisManagement,
        CharacteristicId::Inflation,
        CharacteristicId::VotingAccess,
        CharacteristicId::SoftPower,
        CharacteristicId::ResponsibilityAlignment,
        CharacteristicId::Accountability,
    ];

    pub fn dimension(self) -> Dimension {
        use CharacteristicId::*;
        match self {
            TokenDistribution | NonCollusiveOligopoly | VotingPowerConcentration => Dimension::T,
            TokenFreezeThaw | CodeUpgrades | Access => Dimension::I,
            VotingDelegation | VotingParticipation | Bootstrapping => Dimension::G,
            CrisisManagement | Inflation | VotingAccess => Dimension::E,
            SoftPower | ResponsibilityAlignment | Accountability => Dimension::R,
        }
    }

    pub fn basis(self) -> Basis {
        use CharacteristicId::*;
        match self {
            Bootstrapping | SoftPower | ResponsibilityAlignment | Accountability => Basis::Qualitative,
            Access | VotingAccess => Basis::Mixed,
            _ => Basis::Quantitative,
        }
    }

    pub fn as_str(self) -> &'static str {
        use CharacteristicId::*;
        match self {
            TokenDistribution => "token_distribution",
            NonCollusiveOligopoly => "non_collusive_oligopoly",
            VotingPowerConcentration => "voting_power_concentration",
            TokenFreezeThaw => "token_freeze_thaw",
            CodeUpgrades => "code_upgrades",
            Access => "access",
            VotingDelegation => "voting_delegation",
            VotingParticipation => "voting_participation",
            Bootstrapping => "bootstrapping",
            CrisisManagement => "crisis_management",
            Inflation => "inflation",
            VotingAccess => "voting_access",
            SoftPower => "soft_power",
            ResponsibilityAlignment => "responsibility_alignment",
            Accountability => "accountability",
        }
    }

    pub fn title(self) -> &'static str {
        use CharacteristicId::*;
        match self {
            TokenDistribution => "Token distribution at launch",
            NonCollusiveOligopoly => "Non-collusive oligopoly",
            VotingPowerConcentration => "Concentration of voting power",
            TokenFreezeThaw => "Token locking, freezing and thawing",
            CodeUpgrades => "Code upgrades",
            Access => "Access",
            VotingDelegation => "Voting delegation",
            VotingParticipation => "Voting participation",
            Bootstrapping => "Bootstrapping",
            CrisisManagement => "Crisis management",
            Inflation => "Inflation",
            VotingAccess => "Voting access",
            SoftPower => "Soft power",
            ResponsibilityAlignment => "Responsibility alignment",
            Accountability => "Accountability",
        }
    }

    /// Short description of what the score measures.
    pub fn quantifier(self) -> &'static str {
        use CharacteristicId::*;
        match self {
            TokenDistribution => "Share of maximum supply allocated to insider groups.",
            NonCollusiveOligopoly => "Largest single stakeholder group's share of the allocation.",
            VotingPowerConcentration => "Smallest number of VIAs holding a strict majority of VIA voting power.",
            TokenFreezeThaw => "Number of agents needed to freeze or move balances, if the contract allows it at all.",
            CodeUpgrades => "Number of agents needed to change contract code outside the proposal process, if possible at all.",
            Access => "VIAs needed to carry a general proposal past quorum, combined with the decision timeline check.",
            VotingDelegation => "Number of distinct VIAs currently receiving delegated voting power.",
            VotingParticipation => "Average voting weight cast per decided proposal as a share of circulating supply.",
            Bootstrapping => "Assessor judgment: centralized control beyond what bootstrapping requires.",
            CrisisManagement => "Who can invoke emergency powers and how far those powers reach.",
            Inflation => "Share of daily issuance accruing to insiders.",
            VotingAccess => "VIAs needed to carry a general proposal past quorum, combined with the decision timeline check.",
            SoftPower => "Assessor judgment: how many high-profile agents could informally swing a vote.",
            ResponsibilityAlignment => "Assessor judgment: symmetry between decision power and accountability.",
            Accountability => "Assessor judgment: dispute resolution and reputation management measures.",
        }
    }
}

impl fmt::Display for CharacteristicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CharacteristicId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CharacteristicId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| ModelError::UnknownCharacteristic(s.to_string()))
    }
}
