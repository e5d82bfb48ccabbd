//! Argument parsing and the batch commands.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use tiger_core::metrics::{gini, nakamoto, MetricError, WeightVector};
use tiger_core::model::{Dimension, TokenAmount};
use tiger_core::scorecard::{CalibrationProfile, ScenarioSpec, PAPER_2022};
use tiger_core::session::{load_session, save_session, AssessmentSession, Mutation, SessionState};
use tiger_core::taxonomy::{apply_overrides, class_counts, classify_dataset};

use crate::engine::{json_document, Evaluation, Workspace};
use crate::{read_qualitative, service, CliError, ExitStatus};

#[derive(Debug, Parser)]
#[command(name = "tiger", version, about = "Decentralization assessment of DAO governance snapshots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a dataset and write assessment.json, radar.json and report.md.
    Assess(AssessArgs),
    /// Print one metric as JSON.
    Metrics(MetricsArgs),
    /// Compare the assessment before and after a stack of scenarios.
    Whatif(WhatifArgs),
    /// Print the agent classification as JSON.
    Classify(ClassifyArgs),
    /// Run the local HTTP service.
    Serve(ServeArgs),
    /// Manage session files.
    #[command(subcommand)]
    Session(SessionCommand),
}

/// Where the inputs of an assessment come from.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Dataset bundle directory. Defaults to the session's dataset path.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Calibration profile id or JSON file.
    #[arg(long)]
    pub calibration: Option<String>,
    /// Session file whose log supplies qualitative entries, overrides and scenarios.
    #[arg(long)]
    pub session: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[command(flatten)]
    pub source: Source,
    /// JSON array of qualitative entries.
    #[arg(long, conflicts_with = "session")]
    pub qualitative: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    Gini,
    Nakamoto,
    InsiderShare,
    InsiderHoldings,
    GroupDifferentiation,
    Inflation,
    ViaNakamoto,
    ViaGini,
    GovernanceNakamoto,
    Timing,
    Delegation,
    Participation,
    Decisiveness,
    ClassCounts,
    All,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub metric: MetricName,
    #[command(flatten)]
    pub source: Source,
    /// JSON array of weights for gini and nakamoto instead of dataset balances.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Control threshold for nakamoto, as a fraction.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Count reaching exactly the threshold as control.
    #[arg(long)]
    pub non_strict: bool,
}

#[derive(Debug, Args)]
pub struct WhatifArgs {
    #[command(flatten)]
    pub source: Source,
    /// Scenario in compact (`split_whale:0x..:4`) or JSON form. Repeatable.
    #[arg(long = "scenario")]
    pub scenarios: Vec<String>,
    /// Append the scenarios to the session log.
    #[arg(long, requires = "session")]
    pub commit: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Seed a new session with these qualitative entries.
    #[arg(long, conflicts_with = "session")]
    pub qualitative: Option<PathBuf>,
    /// Directory holding the session file; mutations are persisted there.
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long, default_value_t = 8787)]
    pub port: u16,
}

#[derive(Debug, Subcommand)]
pub enum SessionCommand {
    /// Create a session file for a dataset.
    New {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = PAPER_2022)]
        calibration: String,
        #[arg(long)]
        qualitative: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Inputs resolved from a [`Source`].
pub struct Resolved {
    pub workspace: Workspace,
    pub session: Option<(AssessmentSession, PathBuf)>,
}

impl Resolved {
    pub fn state(&self) -> Result<SessionState, CliError> {
        match &self.session {
            Some((s, _)) => Ok(s.replay()?),
            None => Ok(SessionState::default()),
        }
    }
}

pub fn resolve(source: &Source) -> Result<Resolved, CliError> {
    let session = match &source.session {
        Some(path) => Some((load_session(path)?.0, path.clone())),
        None => None,
    };
    let dataset = match (&source.dataset, &session) {
        (Some(d), _) => d.clone(),
        (None, Some((s, _))) => match &s.dataset_path {
            Some(p) => PathBuf::from(p),
            None => return Err(CliError::Usage("--dataset is required: the session records no dataset path".into())),
        },
        (None, None) => return Err(CliError::Usage("--dataset or --session is required".into())),
    };
    let calibration = source
        .calibration
        .clone()
        .or_else(|| session.as_ref().map(|(s, _)| s.calibration_id.clone()))
        .unwrap_or_else(|| PAPER_2022.to_string());
    let workspace = Workspace::open(&dataset, &calibration)?;
    if let Some((s, _)) = &session {
        s.check_dataset(&workspace.dataset.content_hash)?;
        if s.calibration_id != workspace.calibration.id {
            return Err(CliError::Input(format!(
                "session was created under calibration {}, not {}",
                s.calibration_id, workspace.calibration.id
            )));
        }
    }
    Ok(Resolved { workspace, session })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn assess(args: &AssessArgs, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let r = resolve(&args.source)?;
    let mut state = r.state()?;
    if let Some(q) = &args.qualitative {
        state.qualitative = read_qualitative(q)?;
    }
    let e = r.workspace.evaluate(&state)?;
    fs::create_dir_all(&args.out).map_err(|x| CliError::io(&args.out, x))?;
    write_file(&args.out.join("assessment.json"), &e.assessment_json())?;
    write_file(&args.out.join("radar.json"), &e.radar_json())?;
    write_file(&args.out.join("report.md"), e.report().as_bytes())?;
    let a = &e.assessment;
    let overall = a.overall.map_or_else(|| "indeterminate".to_string(), |o| format!("{o:.1}"));
    let _ = writeln!(err, "overall {overall}, verdict {}", a.verdict.as_str());
    for c in &a.indeterminate {
        let _ = writeln!(err, "requires qualitative review: {c}");
    }
    Ok(ExitStatus::for_verdict(a.verdict))
}

/// Reads a JSON array of numbers or decimal strings.
fn read_weights(path: &Path) -> Result<WeightVector, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let values: Vec<Value> = serde_json::from_slice(&bytes).map_err(|e| bad(e.to_string()))?;
    let entries = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let text = match v {
                Value::Number(n) => n.to_string(),
                Value::String(s) => s.clone(),
                other => return Err(bad(format!("weight {i} is not a number: {other}"))),
            };
            let amount: TokenAmount = text.parse().map_err(|e| bad(format!("weight {i}: {e}")))?;
            Ok((format!("w{i}"), amount))
        })
        .collect::<Result<Vec<_>, _>>()?;
    WeightVector::new(entries).map_err(|e| bad(e.to_string()))
}

fn metric_error(e: MetricError) -> CliError {
    CliError::Input(e.to_string())
}

fn metrics(args: &MetricsArgs, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let weight_metric = matches!(args.metric, MetricName::Gini | MetricName::Nakamoto);
    if args.weights.is_some() && !weight_metric {
        return Err(CliError::Usage("--weights applies only to gini and nakamoto".into()));
    }
    if args.threshold.is_some() && args.metric != MetricName::Nakamoto {
        return Err(CliError::Usage("--threshold applies only to nakamoto".into()));
    }
    let name = args.metric.to_possible_value().expect("no skipped variants").get_name().to_string();

    // Weight metrics on an explicit vector need no dataset.
    if let (true, Some(path)) = (weight_metric, &args.weights) {
        let w = read_weights(path)?;
        let doc = weight_metric_doc(args, &name, &w, json!({ "weights": path.display().to_string() }), None)?;
        out.write_all(&json_document(&doc)).map_err(|e| CliError::Serve(e.to_string()))?;
        return Ok(ExitStatus::Sufficient);
    }

    let r = resolve(&args.source)?;
    let e = r.workspace.evaluate(&r.state()?)?;
    let inputs = json!({
        "dataset": r.workspace.dataset_dir.display().to_string(),
        "dataset_hash": r.workspace.dataset.content_hash,
        "calibration": r.workspace.calibration.id,
    });
    let doc = if weight_metric {
        let ds = &r.workspace.dataset.dataset;
        let holders = WeightVector::new(
            ds.balances.iter().filter(|b| !b.is_contract).map(|b| (b.address.to_string(), b.balance)).collect(),
        )
        .map_err(metric_error)?;
        weight_metric_doc(args, &name, &holders, inputs, Some(&r.workspace.calibration))?
    } else {
        let m = &e.metrics;
        let value = match args.metric {
            MetricName::InsiderShare => json!(m.insider_share_pct),
            MetricName::InsiderHoldings => json!(m.insider_holdings),
            MetricName::GroupDifferentiation => json!(m.group_differentiation),
            MetricName::Inflation => json!(m.inflation),
            MetricName::ViaNakamoto => json!({
                "threshold": m.nakamoto_threshold,
                "strict": m.nakamoto_strict,
                "value": m.via_nakamoto,
            }),
            MetricName::ViaGini => json!(m.via_gini),
            MetricName::GovernanceNakamoto => json!({
                "quorum": m.quorum,
                "opposition": m.opposition,
                "value": m.governance_nakamoto,
            }),
            MetricName::Timing => json!(m.timing),
            MetricName::Delegation => json!(m.delegation),
            MetricName::Participation => json!({ "window": m.participation_window, "value": m.participation }),
            MetricName::Decisiveness => json!(m.decisiveness),
            MetricName::ClassCounts => json!(m.class_counts),
            MetricName::All => serde_json::to_value(m).expect("metrics serialize"),
            MetricName::Gini | MetricName::Nakamoto => unreachable!("handled above"),
        };
        json!({ "metric": name, "inputs": inputs, "value": value })
    };
    out.write_all(&json_document(&doc)).map_err(|e| CliError::Serve(e.to_string()))?;
    Ok(ExitStatus::Sufficient)
}

fn weight_metric_doc(
    args: &MetricsArgs,
    name: &str,
    w: &WeightVector,
    mut inputs: Value,
    calibration: Option<&CalibrationProfile>,
) -> Result<Value, CliError> {
    inputs["count"] = json!(w.len());
    inputs["total"] = json!(w.total());
    let value = match args.metric {
        MetricName::Gini => json!(gini(w).map_err(metric_error)?),
        _ => {
            let threshold = args.threshold.or(calibration.map(|c| c.nakamoto_threshold)).unwrap_or(0.5);
            let strict = !args.non_strict;
            inputs["threshold"] = json!(threshold);
            inputs["strict"] = json!(strict);
            match nakamoto(w, threshold, strict) {
                Ok(k) => json!(k),
                Err(MetricError::InvalidThreshold(t)) => {
                    return Err(CliError::Usage(format!("--threshold {t} must lie in (0, 1]")));
                }
                Err(e) => return Err(metric_error(e)),
            }
        }
    };
    Ok(json!({ "metric": name, "inputs": inputs, "value": value }))
}

#[derive(Debug, Serialize)]
struct Headline {
    overall: Option<f64>,
    verdict: &'static str,
}

#[derive(Debug, Serialize)]
struct Delta {
    before: f64,
    after: f64,
    delta: f64,
}

#[derive(Debug, Serialize)]
struct CharacteristicDiff {
    id: String,
    before: Option<u8>,
    after: Option<u8>,
    metric_deltas: BTreeMap<String, Delta>,
}

#[derive(Debug, Serialize)]
struct DimensionDiff {
    dimension: Dimension,
    before: Option<f64>,
    after: Option<f64>,
}

#[derive(Debug, Serialize)]
struct WhatifReport {
    scenarios: Vec<String>,
    before: Headline,
    after: Headline,
    dimensions: Vec<DimensionDiff>,
    characteristics: Vec<CharacteristicDiff>,
}

fn headline(e: &Evaluation) -> Headline {
    Headline { overall: e.assessment.overall, verdict: e.assessment.verdict.as_str() }
}

/// Characteristics whose score or any metric value changed.
fn diff(before: &Evaluation, after: &Evaluation, scenarios: &[ScenarioSpec]) -> WhatifReport {
    let characteristics = before
        .assessment
        .characteristics
        .iter()
        .zip(&after.assessment.characteristics)
        .filter_map(|(b, a)| {
            let metric_deltas: BTreeMap<String, Delta> = b
                .metric_values
                .iter()
                .filter_map(|(k, &bv)| {
                    let av = a.metric_values.get(k).copied().unwrap_or(f64::NAN);
                    (av != bv).then(|| (k.clone(), Delta { before: bv, after: av, delta: av - bv }))
                })
                .collect();
            (b.score != a.score || !metric_deltas.is_empty()).then(|| CharacteristicDiff {
                id: b.id.to_string(),
                before: b.score,
                after: a.score,
                metric_deltas,
            })
        })
        .collect();
    let dimensions = Dimension::ALL
        .iter()
        .filter_map(|d| {
            let (b, a) = (before.assessment.dimension_scores[d], after.assessment.dimension_scores[d]);
            (b != a).then_some(DimensionDiff { dimension: *d, before: b, after: a })
        })
        .collect();
    WhatifReport {
        scenarios: scenarios.iter().map(ToString::to_string).collect(),
        before: headline(before),
        after: headline(after),
        dimensions,
        characteristics,
    }
}

fn whatif(args: &WhatifArgs, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let specs = args
        .scenarios
        .iter()
        .map(|s| s.parse::<ScenarioSpec>())
        .collect::<Result<Vec<_>, _>>()?;
    let r = resolve(&args.source)?;
    let base = r.state()?;
    let before = r.workspace.evaluate(&base)?;
    let mut next = base.clone();
    next.scenarios.extend(specs.iter().cloned());
    let after = r.workspace.evaluate(&next)?;
    out.write_all(&json_document(&diff(&before, &after, &specs))).map_err(|e| CliError::Serve(e.to_string()))?;
    if args.commit {
        let (mut session, path) = r.session.expect("clap requires --session with --commit");
        for spec in specs {
            session = session.with_mutation(Mutation::PushScenario { spec }, Utc::now())?;
        }
        save_session(&session, &path)?;
    }
    Ok(ExitStatus::Sufficient)
}

fn classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let r = resolve(&args.source)?;
    let state = r.state()?;
    let profiles = classify_dataset(&r.workspace.dataset.dataset, &r.workspace.calibration.taxonomy)?;
    let profiles = apply_overrides(&profiles, &state.overrides)?;
    let doc = json!({ "counts": class_counts(&profiles), "profiles": profiles });
    out.write_all(&json_document(&doc)).map_err(|e| CliError::Serve(e.to_string()))?;
    Ok(ExitStatus::Sufficient)
}

fn session_new(
    dataset: &Path,
    calibration: &str,
    qualitative: Option<&Path>,
    path: &Path,
    err: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let ws = Workspace::open(dataset, calibration)?;
    let entries = match qualitative {
        Some(q) => read_qualitative(q)?,
        None => Vec::new(),
    };
    let session = ws.new_session(&entries, Utc::now())?;
    let hash = save_session(&session, path)?;
    let _ = writeln!(err, "session {} ({} entries), hash {hash}", path.display(), session.log.len());
    Ok(ExitStatus::Sufficient)
}

fn serve(args: &ServeArgs, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let mut source = args.source.clone();
    let stored = args.store.as_ref().map(|d| d.join(service::SESSION_FILE));
    if source.session.is_none() {
        source.session = stored.clone().filter(|p| p.exists());
    }
    let r = resolve(&source)?;
    let session = match r.session {
        Some((s, _)) => s,
        None => {
            let entries = match &args.qualitative {
                Some(q) => read_qualitative(q)?,
                None => Vec::new(),
            };
            r.workspace.new_session(&entries, Utc::now())?
        }
    };
    if let Some(dir) = &args.store {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let state = service::AppState::new(r.workspace, session, stored)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Serve(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", args.port))
            .await
            .map_err(|e| CliError::Serve(format!("cannot bind 127.0.0.1:{}: {e}", args.port)))?;
        let addr = listener.local_addr().map_err(|e| CliError::Serve(e.to_string()))?;
        let _ = writeln!(err, "listening on http://{addr}/api/v1");
        axum::serve(listener, service::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Serve(e.to_string()))
    })?;
    Ok(ExitStatus::Sufficient)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    match &cli.command {
        Command::Assess(a) => assess(a, err),
        Command::Metrics(a) => metrics(a, out),
        Command::Whatif(a) => whatif(a, out),
        Command::Classify(a) => classify(a, out),
        Command::Serve(a) => serve(a, err),
        Command::Session(SessionCommand::New { dataset, calibration, qualitative, out: path }) => {
            session_new(dataset, calibration, qualitative.as_deref(), path, err)
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
/// Documents go to `out`; diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return if code == 0 { 0 } else { ExitStatus::UsageError.code() };
        }
    };
    match execute(&cli, out, err) {
        Ok(status) => status.code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_status().code()
        }
    }
}
