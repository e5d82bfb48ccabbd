use chrono::{TimeZone, Utc};

use crate::model::*;

pub fn addr(n: u32) -> Address {
    format!("0x{:040x}", n).parse().unwrap()
}

pub fn bare_dataset() -> GovernanceDataset {
    GovernanceDataset {
        meta: DatasetMeta {
            snapshot_time: Utc.with_ymd_and_hms(2022, 10, 15, 0, 0, 0).unwrap(),
            dao_name: "test".into(),
            dao_category: None,
            launched_at: None,
        },
        balances: vec![],
        delegations: vec![],
        proposals: vec![],
        votes: vec![],
        allocation: AllocationSchedule::empty(),
        params: GovernanceParams {
            proposal_threshold: TokenAmount::from_units(1),
            autonomous_proposal_bond: TokenAmount::from_units(1),
            quorum: TokenAmount::from_units(1),
            review_period_days: 3,
            voting_period_days: 3,
            queue_period_days: 2,
            assumed_opposition: None,
        },
        capabilities: CapabilityFlags::none(),
        agent_evidence: vec![],
    }
}
