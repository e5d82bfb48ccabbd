use serde::{Deserialize, Serialize};

use crate::model::GovernanceParams;

pub const DEFAULT_MIN_TOTAL_DAYS: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingFairness {
    pub total_days: u32,
    pub min_total_days: u32,
    pub pass: bool,
}

/// Review + voting + queue days against a minimum decision timeline.
/// The bound is inclusive.
pub fn timing_fairness(params: &GovernanceParams, min_total_days: u32) -> TimingFairness {
    let total_days = params
        .review_period_days
        .saturating_add(params.voting_period_days)
        .saturating_add(params.queue_period_days);
    TimingFairness {
        total_days,
        min_total_days,
        pass: total_days >= min_total_days,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TokenAmount;

    fn params(review: u32, voting: u32, queue: u32) -> GovernanceParams {
        GovernanceParams {
            proposal_threshold: TokenAmount::ZERO,
            autonomous_proposal_bond: TokenAmount::ZERO,
            quorum: TokenAmount::from_units(1),
            review_period_days: review,
            voting_period_days: voting,
            queue_period_days: queue,
            assumed_opposition: None,
        }
    }

    #[test]
    fn examples() {
        let t = timing_fairness(&params(3, 3, 2), DEFAULT_MIN_TOTAL_DAYS);
        assert_eq!((t.total_days, t.pass), (8, true));
        let t = timing_fairness(&params(0, 1, 0), 7);
        assert_eq!((t.total_days, t.pass), (1, false));
        let t = timing_fairness(&params(7, 0, 0), 7);
        assert_eq!((t.total_days, t.pass), (7, true));
    }
}
