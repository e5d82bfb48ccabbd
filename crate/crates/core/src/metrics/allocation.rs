//! Allocation-schedule quantifiers: insider share, group differentiation and
//! the split of daily issuance.

use serde::{Deserialize, Serialize};

use crate::model::{AllocationSchedule, GovernanceDataset, GroupCategory, RecipientClass, TokenAmount};

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Percentage of maximum supply allocated to insider groups, to 0.01.
pub fn insider_share(allocation: &AllocationSchedule) -> f64 {
    round2(
        allocation
            .groups
            .iter()
            .filter(|g| g.category == GroupCategory::Insider)
            .map(|g| g.pct_of_max_supply)
            .sum(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupShare {
    pub name: String,
    pub category: GroupCategory,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDifferentiation {
    pub groups: Vec<GroupShare>,
    pub largest_share_pct: f64,
    /// Every group sharing the largest percentage.
    pub largest_groups: Vec<String>,
}

pub fn group_differentiation(allocation: &AllocationSchedule) -> GroupDifferentiation {
    let groups: Vec<GroupShare> = allocation
        .groups
        .iter()
        .map(|g| GroupShare {
            name: g.name.clone(),
            category: g.category,
            pct: g.pct_of_max_supply,
        })
        .collect();
    let largest = groups.iter().map(|g| g.pct).fold(0.0, f64::max);
    let largest_groups = groups
        .iter()
        .filter(|g| (g.pct - largest).abs() < 1e-9)
        .map(|g| g.name.clone())
        .collect();
    GroupDifferentiation {
        groups,
        largest_share_pct: largest,
        largest_groups,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationSplit {
    pub pct_a_external: f64,
    pub pct_b_insider: f64,
    pub no_inflation: bool,
}

/// Share of daily issuance by recipient class. Both shares are zero, and
/// `no_inflation` is set, when nothing is issued.
pub fn inflation_split(allocation: &AllocationSchedule) -> InflationSplit {
    let sum = |class: RecipientClass| -> f64 {
        allocation
            .inflation_streams
            .iter()
            .filter(|s| s.recipient_class == class)
            .map(|s| s.daily_amount.to_f64())
            .sum()
    };
    let a = sum(RecipientClass::AExternal);
    let b = sum(RecipientClass::BInsider);
    if a + b <= 0.0 {
        return InflationSplit {
            pct_a_external: 0.0,
            pct_b_insider: 0.0,
            no_inflation: true,
        };
    }
    InflationSplit {
        pct_a_external: a / (a + b) * 100.0,
        pct_b_insider: b / (a + b) * 100.0,
        no_inflation: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsiderHoldings {
    pub held: TokenAmount,
    pub pct_of_max_supply: f64,
}

/// Tokens currently held by the listed holders of insider groups.
pub fn insider_holdings(dataset: &GovernanceDataset) -> InsiderHoldings {
    let balances = dataset.balance_map();
    let held = TokenAmount::checked_sum(
        dataset
            .allocation
            .groups
            .iter()
            .filter(|g| g.category == GroupCategory::Insider)
            .flat_map(|g| g.holders.iter())
            .filter_map(|h| balances.get(h).map(|b| b.balance)),
    )
    .unwrap_or(TokenAmount::from_atoms(u128::MAX));
    InsiderHoldings {
        held,
        pct_of_max_supply: held.percent_of(dataset.allocation.max_supply).unwrap_or(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InflationStream, StakeholderGroup};

    fn group(name: &str, category: GroupCategory, units: u64, pct: f64) -> StakeholderGroup {
        StakeholderGroup {
            name: name.into(),
            category,
            allocation: TokenAmount::from_units(units),
            pct_of_max_supply: pct,
            holders: vec![],
        }
    }

    fn schedule(groups: Vec<StakeholderGroup>) -> AllocationSchedule {
        AllocationSchedule {
            groups,
            ..AllocationSchedule::empty()
        }
    }

    fn table4() -> AllocationSchedule {
        use GroupCategory::*;
        schedule(vec![
            group("Shareholders", Insider, 2_396_307, 23.96),
            group("Founders & team", Insider, 2_226_037, 22.26),
            group("Future team members", Insider, 372_707, 3.73),
            group("Users", External, 4_229_949, 42.30),
            group("Community", External, 775_000, 7.75),
        ])
    }

    #[test]
    fn insider_share_examples() {
        assert_eq!(insider_share(&table4()), 49.95);
        let external = schedule(vec![group("a", GroupCategory::External, 1, 100.0)]);
        assert_eq!(insider_share(&external), 0.0);
        let insider = schedule(vec![group("a", GroupCategory::Insider, 1, 100.0)]);
        assert_eq!(insider_share(&insider), 100.0);
    }

    #[test]
    fn differentiation_examples() {
        let d = group_differentiation(&table4());
        assert_eq!(d.largest_share_pct, 42.30);
        assert_eq!(d.largest_groups, vec!["Users".to_string()]);
        assert_eq!(d.groups.len(), 5);

        let single = group_differentiation(&schedule(vec![group("a", GroupCategory::External, 1, 100.0)]));
        assert_eq!(single.largest_share_pct, 100.0);

        let tie = group_differentiation(&schedule(vec![
            group("a", GroupCategory::External, 1, 50.0),
            group("b", GroupCategory::Insider, 1, 50.0),
        ]));
        assert_eq!(tie.largest_share_pct, 50.0);
        assert_eq!(tie.largest_groups, vec!["a".to_string(), "b".to_string()]);
    }

    fn stream(label: &str, units: u64, class: RecipientClass) -> InflationStream {
        InflationStream {
            label: label.into(),
            daily_amount: TokenAmount::from_units(units),
            recipient_class: class,
        }
    }

    #[test]
    fn inflation_examples() {
        let mut s = AllocationSchedule::empty();
        s.daily_inflation = TokenAmount::from_units(1139);
        s.inflation_streams = vec![stream("users", 1139, RecipientClass::AExternal)];
        let split = inflation_split(&s);
        assert_eq!((split.pct_a_external, split.pct_b_insider, split.no_inflation), (100.0, 0.0, false));

        s.inflation_streams = vec![
            stream("lp", 10, RecipientClass::AExternal),
            stream("team", 10, RecipientClass::BInsider),
        ];
        let split = inflation_split(&s);
        assert_eq!((split.pct_a_external, split.pct_b_insider), (50.0, 50.0));

        let split = inflation_split(&AllocationSchedule::empty());
        assert_eq!((split.pct_a_external, split.pct_b_insider, split.no_inflation), (0.0, 0.0, true));
    }
}
