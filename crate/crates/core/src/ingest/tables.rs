//! CSV and JSON Lines tables of a dataset bundle.

use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};

use super::IngestError;
use crate::model::{BalanceRecord, DelegationEdge, Proposal, Support, VoteRecord};
use crate::taxonomy::{AgentClass, AgentEvidence};

pub const BALANCES_HEADER: [&str; 3] = ["address", "balance", "is_contract"];
pub const DELEGATIONS_HEADER: [&str; 3] = ["delegator", "delegatee", "amount"];
pub const VOTES_HEADER: [&str; 4] = ["proposal_id", "voter", "support", "weight"];
pub const AGENTS_HEADER: [&str; 6] = [
    "address",
    "identity_evidence",
    "active_days_fraction",
    "automation_flag",
    "cross_dao_count",
    "manual_class",
];

/// One data row with enough context to report a precise error.
struct Row<'a> {
    file: &'a str,
    line: u64,
    record: StringRecord,
}

impl Row<'_> {
    fn err(&self, column: usize, message: impl Into<String>) -> IngestError {
        IngestError::Malformed {
            file: self.file.to_string(),
            line: self.line,
            column: Some(column + 1),
            message: message.into(),
        }
    }

    fn field(&self, column: usize) -> &str {
        self.record.get(column).unwrap_or("")
    }

    fn parse<T: FromStr>(&self, column: usize) -> Result<T, IngestError>
    where
        T::Err: std::fmt::Display,
    {
        self.field(column).parse().map_err(|e: T::Err| self.err(column, e.to_string()))
    }

    fn flag(&self, column: usize) -> Result<bool, IngestError> {
        match self.field(column) {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(self.err(column, format!("expected 0 or 1, got {other:?}"))),
        }
    }
}

fn read_rows<'a>(file: &'a str, data: &[u8], header: &[&str]) -> Result<Vec<Row<'a>>, IngestError> {
    let mut reader = ReaderBuilder::new().has_headers(false).from_reader(data);
    let mut rows = Vec::new();
    let mut saw_header = false;
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IngestError::Malformed { file: file.to_string(), line, column: None, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            if record.iter().ne(header.iter().copied()) {
                return Err(IngestError::Malformed {
                    file: file.to_string(),
                    line,
                    column: None,
                    message: format!("expected header `{}`", header.join(",")),
                });
            }
            saw_header = true;
            continue;
        }
        if record.len() != header.len() {
            return Err(IngestError::Malformed {
                file: file.to_string(),
                line,
                column: None,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        rows.push(Row { file, line, record });
    }
    if !saw_header {
        return Err(IngestError::Malformed {
            file: file.to_string(),
            line: 1,
            column: None,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    Ok(rows)
}

fn write_rows(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn bit(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

pub fn parse_balances(file: &str, data: &[u8]) -> Result<Vec<BalanceRecord>, IngestError> {
    read_rows(file, data, &BALANCES_HEADER)?
        .iter()
        .map(|r| Ok(BalanceRecord { address: r.parse(0)?, balance: r.parse(1)?, is_contract: r.flag(2)? }))
        .collect()
}

pub fn render_balances(rows: &[BalanceRecord]) -> Vec<u8> {
    write_rows(
        &BALANCES_HEADER,
        rows.iter().map(|b| vec![b.address.to_string(), b.balance.to_string(), bit(b.is_contract)]),
    )
}

pub fn parse_delegations(file: &str, data: &[u8]) -> Result<Vec<DelegationEdge>, IngestError> {
    read_rows(file, data, &DELEGATIONS_HEADER)?
        .iter()
        .map(|r| Ok(DelegationEdge { delegator: r.parse(0)?, delegatee: r.parse(1)?, amount: r.parse(2)? }))
        .collect()
}

pub fn render_delegations(rows: &[DelegationEdge]) -> Vec<u8> {
    write_rows(
        &DELEGATIONS_HEADER,
        rows.iter().map(|d| vec![d.delegator.to_string(), d.delegatee.to_string(), d.amount.to_string()]),
    )
}

fn parse_support(r: &Row, column: usize) -> Result<Support, IngestError> {
    match r.field(column) {
        "for" => Ok(Support::For),
        "against" => Ok(Support::Against),
        "abstain" => Ok(Support::Abstain),
        other => Err(r.err(column, format!("support must be for, against or abstain, got {other:?}"))),
    }
}

pub fn parse_votes(file: &str, data: &[u8]) -> Result<Vec<VoteRecord>, IngestError> {
    read_rows(file, data, &VOTES_HEADER)?
        .iter()
        .map(|r| {
            Ok(VoteRecord {
                proposal_id: r.parse(0)?,
                voter: r.parse(1)?,
                support: parse_support(r, 2)?,
                weight: r.parse(3)?,
            })
        })
        .collect()
}

pub fn render_votes(rows: &[VoteRecord]) -> Vec<u8> {
    write_rows(
        &VOTES_HEADER,
        rows.iter().map(|v| {
            vec![v.proposal_id.to_string(), v.voter.to_string(), v.support.as_str().to_string(), v.weight.to_string()]
        }),
    )
}

pub fn parse_agents(file: &str, data: &[u8]) -> Result<Vec<AgentEvidence>, IngestError> {
    read_rows(file, data, &AGENTS_HEADER)?
        .iter()
        .map(|r| {
            let active_days_fraction: f64 = r.parse(2)?;
            if !(0.0..=1.0).contains(&active_days_fraction) {
                return Err(r.err(2, "active_days_fraction must lie in [0, 1]"));
            }
            let manual_class = match r.field(5) {
                "" => None,
                _ => Some(r.parse::<AgentClass>(5)?),
            };
            Ok(AgentEvidence {
                address: r.parse(0)?,
                identity_evidence: r.flag(1)?,
                active_days_fraction,
                automation_flag: r.flag(3)?,
                cross_dao_count: r.parse(4)?,
                manual_class,
            })
        })
        .collect()
}

pub fn render_agents(rows: &[AgentEvidence]) -> Vec<u8> {
    write_rows(
        &AGENTS_HEADER,
        rows.iter().map(|e| {
            vec![
                e.address.to_string(),
                bit(e.identity_evidence),
                e.active_days_fraction.to_string(),
                bit(e.automation_flag),
                e.cross_dao_count.to_string(),
                e.manual_class.map(|c| c.to_string()).unwrap_or_default(),
            ]
        }),
    )
}

pub fn parse_proposals(file: &str, data: &[u8]) -> Result<Vec<Proposal>, IngestError> {
    let text = std::str::from_utf8(data).map_err(|e| IngestError::Malformed {
        file: file.to_string(),
        line: 0,
        column: None,
        message: e.to_string(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| IngestError::Malformed {
                file: file.to_string(),
                line: i as u64 + 1,
                column: Some(e.column()),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn render_proposals(rows: &[Proposal]) -> Vec<u8> {
    let mut out = String::new();
    for p in rows {
        out.push_str(&serde_json::to_string(p).expect("proposal serializes"));
        out.push('\n');
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::addr;

    #[test]
    fn balances_round_trip() {
        let data = b"address,balance,is_contract\n0x00000000000000000000000000000000000000AB,12.5,0\n";
        let rows = parse_balances("balances.csv", data).unwrap();
        assert_eq!(rows[0].address, addr(0xab));
        let out = render_balances(&rows);
        assert_eq!(out, b"address,balance,is_contract\n0x00000000000000000000000000000000000000ab,12.5,0\n");
        assert_eq!(parse_balances("balances.csv", &out).unwrap(), rows);
    }

    #[test]
    fn negative_balance_reports_line_and_column() {
        let data = b"address,balance,is_contract\n0x0000000000000000000000000000000000000001,1,0\n0x0000000000000000000000000000000000000002,-3,0\n";
        let err = parse_balances("balances.csv", data).unwrap_err();
        match err {
            IngestError::Malformed { file, line, column, message } => {
                assert_eq!((file.as_str(), line, column), ("balances.csv", 3, Some(2)));
                assert!(message.contains("negative"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_and_width_checks() {
        assert!(matches!(
            parse_votes("votes.csv", b"id,voter,support,weight\n"),
            Err(IngestError::Malformed { line: 1, .. })
        ));
        assert!(matches!(parse_votes("votes.csv", b""), Err(IngestError::Malformed { line: 1, .. })));
        let short = b"proposal_id,voter,support,weight\n1,0x0000000000000000000000000000000000000001,for\n";
        assert!(matches!(parse_votes("votes.csv", short), Err(IngestError::Malformed { line: 2, .. })));
        let bad = b"proposal_id,voter,support,weight\n1,0x0000000000000000000000000000000000000001,maybe,1\n";
        assert!(matches!(
            parse_votes("votes.csv", bad),
            Err(IngestError::Malformed { line: 2, column: Some(3), .. })
        ));
    }

    #[test]
    fn agents_optional_class() {
        let data = b"address,identity_evidence,active_days_fraction,automation_flag,cross_dao_count,manual_class\n\
0x0000000000000000000000000000000000000001,1,0.25,0,3,\n\
0x0000000000000000000000000000000000000002,0,1,1,0,PIA\n";
        let rows = parse_agents("agents.csv", data).unwrap();
        assert_eq!(rows[0].manual_class, None);
        assert_eq!(rows[1].manual_class, Some(AgentClass::Pia));
        assert_eq!(render_agents(&rows), data.to_vec());
    }

    #[test]
    fn proposals_jsonl() {
        let data = b"{\"id\":1,\"submitted_at\":\"2020-04-16T00:00:00Z\",\"status\":\"executed\",\"is_general\":true}\n";
        let rows = parse_proposals("proposals.jsonl", data).unwrap();
        assert_eq!(render_proposals(&rows), data.to_vec());
        let err = parse_proposals("proposals.jsonl", b"\n{\"id\":1}\n").unwrap_err();
        assert!(matches!(err, IngestError::Malformed { line: 2, .. }));
    }
}
