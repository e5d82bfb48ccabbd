//! Markdown report rendering.

use std::fmt::Write;

use chrono::SecondsFormat;
use tiger_core::model::{Basis, Dimension};
use tiger_core::scorecard::CharacteristicResult;

use crate::engine::Evaluation;

/// Up to four decimals with trailing zeros removed.
pub fn number(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn score_cell(score: Option<f64>) -> String {
    score.map_or_else(|| "indeterminate".to_string(), |s| format!("{s:.1}"))
}

fn basis(b: Basis) -> &'static str {
    match b {
        Basis::Quantitative => "quantitative",
        Basis::Qualitative => "qualitative",
        Basis::Mixed => "mixed",
    }
}

fn characteristic(out: &mut String, c: &CharacteristicResult) {
    let critical = if c.critical { " (critical)" } else { "" };
    writeln!(out, "### {}{critical}\n", c.id.title()).unwrap();
    writeln!(out, "- Id: `{}`", c.id).unwrap();
    writeln!(out, "- Basis: {}", basis(c.basis)).unwrap();
    match c.score {
        Some(s) => writeln!(out, "- Score: {s}").unwrap(),
        None => writeln!(out, "- Score: indeterminate, requires qualitative review").unwrap(),
    }
    if c.grace_applied {
        writeln!(out, "- Grace period floor applied").unwrap();
    }
    writeln!(out, "- Measures: {}", c.id.quantifier()).unwrap();
    for (k, v) in &c.metric_values {
        writeln!(out, "- `{k}`: {}", number(*v)).unwrap();
    }
    if !c.provenance.is_empty() {
        writeln!(out, "- Sources: {}", c.provenance.join("; ")).unwrap();
    }
    writeln!(out, "\n{}\n", c.evidence).unwrap();
}

pub fn render(e: &Evaluation) -> String {
    let a = &e.assessment;
    let mut out = String::new();
    writeln!(out, "# Decentralization assessment: {}\n", e.dao_name).unwrap();
    writeln!(out, "- Dataset hash: `{}`", e.dataset_hash).unwrap();
    writeln!(out, "- Calibration: `{}`", a.calibration_id).unwrap();
    writeln!(out, "- Generated at: {}", e.generated_at.to_rfc3339_opts(SecondsFormat::Secs, true)).unwrap();
    if !e.scenarios.is_empty() {
        writeln!(out, "- Scenarios: {}", e.scenarios.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", "))
            .unwrap();
    }

    writeln!(out, "\n## Summary\n").unwrap();
    writeln!(out, "| Dimension | Score |\n|---|---|").unwrap();
    for d in Dimension::ALL {
        writeln!(out, "| {} ({}) | {} |", d.title(), d.label(), score_cell(a.dimension_scores[&d])).unwrap();
    }
    writeln!(out, "| Overall | {} |\n", score_cell(a.overall)).unwrap();
    writeln!(out, "Verdict: **{}** (sufficiency bar {:.1})\n", a.verdict.as_str(), e.sufficiency_bar).unwrap();
    let ids = |v: &[tiger_core::model::CharacteristicId]| {
        if v.is_empty() {
            "none".to_string()
        } else {
            v.iter().map(|c| format!("`{c}`")).collect::<Vec<_>>().join(", ")
        }
    };
    writeln!(out, "- Critical failures: {}", ids(&a.critical_failures)).unwrap();
    writeln!(out, "- Requires qualitative review: {}\n", ids(&a.indeterminate)).unwrap();

    for d in Dimension::ALL {
        writeln!(out, "## {} ({}): {}\n", d.title(), d.label(), score_cell(a.dimension_scores[&d])).unwrap();
        for c in a.characteristics.iter().filter(|c| c.dimension == d) {
            characteristic(&mut out, c);
        }
    }

    writeln!(out, "## Limits\n").unwrap();
    writeln!(
        out,
        "Scores describe the governance snapshot at the dataset's point in time. \
They do not establish that the arrangement is a long-term equilibrium; \
holders, delegates and capabilities can shift after the snapshot."
    )
    .unwrap();
    out
}
