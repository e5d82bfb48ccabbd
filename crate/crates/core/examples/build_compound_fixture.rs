//! Regenerates `fixtures/compound/` and `fixtures/compound-qualitative.json`.
//!
//! The fixture is a reconstruction: published aggregate figures are turned
//! into concrete balances, delegations and votes that reproduce them. Every
//! address is derived from a readable label so the output is deterministic.
//!
//! Run with `cargo run -p tiger-core --example build_compound_fixture`.

use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use tiger_core::ingest::save_dataset;
use tiger_core::model::{
    validate_dataset, Address, AllocationSchedule, BalanceRecord, CapabilityFlags, CharacteristicId, DaoCategory,
    DatasetMeta, DelegationEdge, GovernanceDataset, GovernanceParams, GroupCategory, InflationStream,
    PauseGuardian, Proposal, ProposalStatus, QualitativeEntry, RecipientClass, StakeholderGroup, Support,
    TokenAmount, VoteRecord,
};
use tiger_core::taxonomy::AgentEvidence;

fn units(n: u64) -> TokenAmount {
    TokenAmount::from_units(n)
}

fn addr(label: &str) -> Address {
    Address::derived(&format!("compound-fixture/{label}"))
}

fn at(y: i32, m: u32, d: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
}

fn record(address: &Address, balance: TokenAmount, is_contract: bool) -> BalanceRecord {
    BalanceRecord { address: address.clone(), balance, is_contract }
}

fn evidence(address: &Address, identity: bool, active: f64, automated: bool, cross_dao: u32) -> AgentEvidence {
    AgentEvidence {
        address: address.clone(),
        identity_evidence: identity,
        active_days_fraction: active,
        automation_flag: automated,
        cross_dao_count: cross_dao,
        manual_class: None,
    }
}

/// Delegated-in power per VIA delegate, largest first.
fn via_powers() -> Vec<u64> {
    let mut p = vec![140_000, 130_000, 125_000, 118_494];
    p.extend([95_000; 8]);
    p.extend((0..47).map(|i| 44_000 - 900 * i));
    p.push(6_433);
    assert_eq!(p.len(), 60);
    assert_eq!(p.iter().sum::<u64>(), 2_375_027);
    p
}

/// Votes for one proposal: `heavy` voters share `heavy_weight`, the rest
/// share `light_weight`.
fn votes_for(
    id: u64,
    heavy: &[Address],
    light: &[Address],
    heavy_weight: TokenAmount,
    light_weight: TokenAmount,
    against_every: usize,
) -> Vec<VoteRecord> {
    let hw = heavy_weight.split_exact(heavy.len() as u32).unwrap();
    let lw = light_weight.split_exact(light.len() as u32).unwrap();
    heavy
        .iter()
        .zip(hw)
        .chain(light.iter().zip(lw))
        .enumerate()
        .map(|(i, (voter, weight))| VoteRecord {
            proposal_id: id,
            voter: voter.clone(),
            support: if against_every > 0 && i % against_every == against_every - 1 {
                Support::Against
            } else {
                Support::For
            },
            weight,
        })
        .collect()
}

fn build() -> (GovernanceDataset, Vec<QualitativeEntry>) {
    let snapshot = at(2022, 10, 15);

    // Holders.
    let contracts = [("comptroller", 3_500_000), ("ccomp-market", 800_000), ("timelock", 282_610)];
    let shareholders: Vec<Address> = (0..3).map(|i| addr(&format!("shareholder/{i}"))).collect();
    let founders: Vec<Address> = (0..3).map(|i| addr(&format!("founder/{i}"))).collect();
    let future_team = vec![addr("future-team/0")];
    let insider_balances: Vec<(Address, u64)> = shareholders
        .iter()
        .map(|a| (a.clone(), 350_000))
        .chain(founders.iter().cloned().zip([400_000, 350_000, 250_000]))
        .chain([(future_team[0].clone(), 150_000)])
        .collect();
    let vias: Vec<Address> = (0..60).map(|i| addr(&format!("delegate/{i:02}"))).collect();
    let minor_delegates: Vec<Address> = (0..4).map(|i| addr(&format!("minor-delegate/{i}"))).collect();
    let retail_delegators: Vec<Address> = (0..200).map(|i| addr(&format!("retail-delegator/{i:03}"))).collect();
    let holders: Vec<Address> = (0..50).map(|i| addr(&format!("holder/{i:02}"))).collect();

    let mut balances: Vec<BalanceRecord> = contracts
        .iter()
        .map(|(label, n)| record(&addr(&format!("contract/{label}")), units(*n), true))
        .collect();
    balances.extend(insider_balances.iter().map(|(a, n)| record(a, units(*n), false)));
    balances.extend(vias.iter().chain(&minor_delegates).map(|a| record(a, TokenAmount::ZERO, false)));
    let retail_shares = units(177_404).split_exact(200).unwrap();
    balances.extend(retail_delegators.iter().zip(&retail_shares).map(|(a, s)| record(a, *s, false)));
    let holder_shares = units(189_986).split_exact(50).unwrap();
    balances.extend(holders.iter().zip(&holder_shares).map(|(a, s)| record(a, *s, false)));

    // Delegations: fill each delegatee's target from the delegator pool in order.
    let targets: Vec<(Address, TokenAmount)> = vias
        .iter()
        .cloned()
        .zip(via_powers().into_iter().map(units))
        .chain(minor_delegates.iter().cloned().zip([1_000, 700, 400, 277].map(units)))
        .collect();
    let mut pool: Vec<(Address, TokenAmount)> = insider_balances
        .iter()
        .map(|(a, n)| (a.clone(), units(*n)))
        .chain(retail_delegators.iter().cloned().zip(retail_shares.iter().copied()))
        .collect();
    let mut delegations = Vec::new();
    let mut source = 0;
    for (delegatee, target) in targets {
        let mut need = target;
        while !need.is_zero() {
            let (delegator, left) = &mut pool[source];
            let take = need.min(*left);
            delegations.push(DelegationEdge { delegator: delegator.clone(), delegatee: delegatee.clone(), amount: take });
            *left = left.checked_sub(take).unwrap();
            need = need.checked_sub(take).unwrap();
            if left.is_zero() {
                source += 1;
            }
        }
    }
    assert_eq!(source, pool.len(), "every delegator delegates its full balance");

    // Proposals and votes.
    let mut proposals = Vec::new();
    let mut votes = Vec::new();
    let mut id = 0u64;
    let years = [(2020, at(2020, 4, 16), 30usize, 56usize), (2021, at(2021, 1, 6), 47, 60), (2022, at(2022, 1, 3), 36, 66)];
    for (year, start, count, voters) in years {
        let spacing_hours = if year == 2020 { 24 * 8 } else if year == 2021 { 24 * 7 + 12 } else { 24 * 7 + 12 };
        for j in 0..count {
            id += 1;
            let status = match (year, j) {
                (2022, 20) | (2021, 9) => ProposalStatus::Canceled,
                (_, j) if j % 7 == 3 => ProposalStatus::Defeated,
                _ => ProposalStatus::Executed,
            };
            proposals.push(Proposal {
                id,
                submitted_at: start + Duration::hours(spacing_hours * j as i64),
                status,
                is_general: j % 5 != 4,
            });
            let heavy: Vec<Address> = (0..10).map(|t| vias[(j + t) % 12].clone()).collect();
            let retail = 6 + (year == 2022) as usize * 2;
            let other_vias = voters - 10 - retail;
            let light: Vec<Address> = vias[12..12 + other_vias]
                .iter()
                .cloned()
                .chain((0..retail).map(|t| holders[(j * retail + t) % holders.len()].clone()))
                .collect();
            assert_eq!(heavy.len() + light.len(), voters);
            // In 2022 every proposal carries 600 000 of cast weight; the top
            // ten hold a strict majority on all but eleven of them.
            let decisive = !(year == 2022 && j % 3 == 2 && j != 35);
            let (hw, lw) = match (year, decisive) {
                (2022, true) => (400_000, 200_000),
                (2022, false) => (250_000, 350_000),
                _ => (300_000, 150_000),
            };
            votes.extend(votes_for(id, &heavy, &light, units(hw), units(lw), 9));
        }
    }
    assert_eq!(id, 113);
    // One proposal still open at the snapshot.
    id += 1;
    proposals.push(Proposal { id, submitted_at: at(2022, 10, 12), status: ProposalStatus::Active, is_general: true });
    votes.extend(votes_for(id, &vias[..5], &vias[5..20], units(200_000), units(50_000), 0));

    // Evidence.
    let mut agent_evidence: Vec<AgentEvidence> = vias.iter().map(|a| evidence(a, true, 0.9, false, 3)).collect();
    agent_evidence.extend(insider_balances.iter().map(|(a, _)| evidence(a, true, 0.4, false, 1)));
    agent_evidence.extend(minor_delegates.iter().map(|a| evidence(a, false, 0.1, true, 0)));
    agent_evidence.extend(holders[..10].iter().map(|a| evidence(a, false, 0.7, false, 2)));
    agent_evidence.extend(holders[10..20].iter().map(|a| evidence(a, false, 0.95, true, 0)));

    let group = |name: &str, category, allocation: u64, pct: f64, holders: &[Address]| StakeholderGroup {
        name: name.to_string(),
        category,
        allocation: units(allocation),
        pct_of_max_supply: pct,
        holders: holders.to_vec(),
    };
    let allocation = AllocationSchedule {
        max_supply: units(10_000_000),
        circulating: units(7_150_000),
        groups: vec![
            group("Shareholders of Compound Labs, Inc.", GroupCategory::Insider, 2_396_307, 23.96, &shareholders),
            group("Founders & team", GroupCategory::Insider, 2_226_037, 22.26, &founders),
            group("Future team members", GroupCategory::Insider, 372_707, 3.73, &future_team),
            group("Users", GroupCategory::External, 4_229_949, 42.30, &[]),
            group("Community Allocation", GroupCategory::External, 775_000, 7.75, &[]),
        ],
        vesting_end: Some(NaiveDate::from_ymd_opt(2024, 6, 30).unwrap()),
        daily_inflation: units(1139),
        inflation_streams: vec![InflationStream {
            label: "market participants".into(),
            daily_amount: units(1139),
            recipient_class: RecipientClass::AExternal,
        }],
    };

    let dataset = GovernanceDataset {
        meta: DatasetMeta {
            snapshot_time: snapshot,
            dao_name: "Compound".into(),
            dao_category: Some(DaoCategory::Protocol),
            launched_at: Some(at(2018, 9, 26)),
        },
        balances,
        delegations,
        proposals,
        votes,
        allocation,
        params: GovernanceParams {
            proposal_threshold: units(25_000),
            autonomous_proposal_bond: units(100),
            quorum: units(400_000),
            review_period_days: 3,
            voting_period_days: 3,
            queue_period_days: 2,
            assumed_opposition: None,
        },
        capabilities: CapabilityFlags {
            can_freeze_balances: false,
            freeze_agent_count: None,
            can_upgrade_code: false,
            upgrade_agent_count: None,
            pause_guardian: Some(PauseGuardian {
                holder_count: 4,
                pausable_functions: ["mint", "borrow", "transfer", "liquidate"].map(String::from).to_vec(),
                is_full_shutdown: false,
                community_controlled: true,
            }),
        },
        agent_evidence,
    };

    let entry = |c, score, evidence: &str| QualitativeEntry {
        characteristic: c,
        score,
        evidence: evidence.to_string(),
        assessor: "fixture".into(),
        entered_at: snapshot,
    };
    let qualitative = vec![
        entry(
            CharacteristicId::Bootstrapping,
            5,
            "Early contributors hold no special governance privileges; all changes pass through on-chain votes.",
        ),
        entry(
            CharacteristicId::SoftPower,
            3,
            "A sizeable share of pre-proposal forum posts come from founders, major holders and one risk-modelling firm that also runs a top delegate.",
        ),
        entry(
            CharacteristicId::ResponsibilityAlignment,
            4,
            "Delegates who hold decisive power are publicly identified and vote on the record.",
        ),
        entry(
            CharacteristicId::Accountability,
            2,
            "No formal mechanism holds delegates or the pause multisig accountable beyond reputation.",
        ),
    ];
    (dataset, qualitative)
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let (dataset, qualitative) = build();
    let report = validate_dataset(&dataset);
    assert!(report.is_empty(), "fixture must validate: {report:?}");
    let hash = save_dataset(&dataset, &root.join("compound")).expect("write fixture");
    let mut q = serde_json::to_vec_pretty(&qualitative).unwrap();
    q.push(b'\n');
    fs::write(root.join("compound-qualitative.json"), q).expect("write qualitative entries");
    println!("{hash}");
}
