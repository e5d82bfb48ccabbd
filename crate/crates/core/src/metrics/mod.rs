//! Quantitative quantifiers computed from a dataset and agent profiles.
//!
//! Every function here is pure. Concentration measures work on
//! [`WeightVector`]s; the rest read the dataset directly.

mod allocation;
mod concentration;
mod delegation;
mod participation;
mod timing;

use thiserror::Error;

pub use allocation::{
    group_differentiation, inflation_split, insider_holdings, insider_share, GroupDifferentiation, GroupShare,
    InflationSplit, InsiderHoldings,
};
pub use concentration::{
    gini, governance_nakamoto, nakamoto, GovernanceNakamoto, Opposition, Threshold, WeightVector,
};
pub use delegation::{
    delegation_stats, delegation_stats_for, effective_voting_power, via_power_vector, DelegationStats,
    DEFAULT_TOP_NS,
};
pub use participation::{
    decisiveness, participation, Decisiveness, ParticipationStats, ProposalDecisiveness, Window,
};
pub use timing::{timing_fairness, TimingFairness, DEFAULT_MIN_TOTAL_DAYS};

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("weight vector is empty")]
    EmptyWeights,
    #[error("weight vector total is zero")]
    ZeroTotal,
    #[error("threshold {0} must lie in (0, 1]")]
    InvalidThreshold(f64),
    #[error("no subset of holders crosses the threshold")]
    ThresholdUnreachable,
    #[error("no decided proposal with votes in the window")]
    EmptyWindow,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("dataset inconsistent: {0}")]
    InvalidDataset(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
