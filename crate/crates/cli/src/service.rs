//! Local HTTP service under `/api/v1`.
//!
//! Mutations serialize through one writer lock and are appended to the
//! session log before the new assessment is published. Reads take the last
//! published snapshot and never wait on a writer.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::Router;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tiger_core::model::{Address, CharacteristicId, ModelError, QualitativeEntry};
use tiger_core::scorecard::{ScenarioSpec, ScorecardError};
use tiger_core::session::{save_session, AssessmentSession, AuditEntry, Mutation, SessionError};
use tiger_core::taxonomy::AgentClass;

use crate::engine::{json_document, Evaluation, Workspace};
use crate::CliError;

pub const SESSION_FILE: &str = "session.json";
pub const SEQ_HEADER: &str = "x-tiger-audit-seq";

/// One committed session state with its rendered documents.
pub struct Snapshot {
    pub session: AssessmentSession,
    pub evaluation: Evaluation,
    pub assessment_json: Vec<u8>,
    pub radar_json: Vec<u8>,
    pub metrics_json: Vec<u8>,
    pub report: String,
}

impl Snapshot {
    fn build(workspace: &Workspace, session: AssessmentSession) -> Result<Self, CliError> {
        let evaluation = workspace.evaluate(&session.replay()?)?;
        Ok(Snapshot {
            assessment_json: evaluation.assessment_json(),
            radar_json: evaluation.radar_json(),
            metrics_json: evaluation.metrics_json(),
            report: evaluation.report(),
            evaluation,
            session,
        })
    }

    pub fn seq(&self) -> u64 {
        self.session.seq()
    }
}

pub struct AppState {
    workspace: Workspace,
    store: Option<PathBuf>,
    writer: tokio::sync::Mutex<()>,
    current: RwLock<Arc<Snapshot>>,
}

impl AppState {
    /// `store` is the session file mutations are persisted to, if any.
    pub fn new(workspace: Workspace, session: AssessmentSession, store: Option<PathBuf>) -> Result<Arc<Self>, CliError> {
        session.check_dataset(&workspace.dataset.content_hash)?;
        let snapshot = Snapshot::build(&workspace, session)?;
        if let Some(path) = &store {
            save_session(&snapshot.session, path)?;
        }
        Ok(Arc::new(AppState {
            workspace,
            store,
            writer: tokio::sync::Mutex::new(()),
            current: RwLock::new(Arc::new(snapshot)),
        }))
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock poisoned").clone()
    }

    /// Appends `mutation`, re-evaluates and publishes. Nothing is committed
    /// if the mutation is invalid or the new state fails to evaluate.
    pub async fn commit(&self, mutation: Mutation, at: DateTime<Utc>) -> Result<Arc<Snapshot>, CliError> {
        let _guard = self.writer.lock().await;
        let next = self.snapshot().session.with_mutation(mutation, at)?;
        let snapshot = Arc::new(Snapshot::build(&self.workspace, next)?);
        if let Some(path) = &self.store {
            save_session(&snapshot.session, path)?;
        }
        *self.current.write().expect("snapshot lock poisoned") = snapshot.clone();
        Ok(snapshot)
    }
}

/// Machine-readable error body.
#[derive(Debug, Serialize)]
struct ApiError {
    error: String,
    detail: String,
}

fn respond(seq: u64, status: StatusCode, content_type: &'static str, body: Vec<u8>) -> Response {
    let mut r = (status, body).into_response();
    let h = r.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    h.insert(SEQ_HEADER, HeaderValue::from(seq));
    r
}

fn json_response(seq: u64, body: Vec<u8>) -> Response {
    respond(seq, StatusCode::OK, "application/json", body)
}

fn error(seq: u64, status: StatusCode, code: &str, detail: impl Into<String>) -> Response {
    let body = ApiError { error: code.to_string(), detail: detail.into() };
    respond(seq, status, "application/json", json_document(&body))
}

fn model_error_code(e: &ModelError) -> &'static str {
    match e {
        ModelError::ScoreOutOfRange(_) => "score out of range",
        ModelError::NotQualitative(_) => "not a qualitative characteristic",
        ModelError::UnknownCharacteristic(_) => "unknown characteristic",
        ModelError::InvalidAddress(_) => "invalid address",
        _ => "invalid value",
    }
}

/// Maps a rejected mutation to a 400 response.
fn rejected(seq: u64, e: &CliError) -> Response {
    let code = match e {
        CliError::Session(SessionError::InvalidMutation { .. }) => "invalid mutation",
        CliError::Scorecard(ScorecardError::InvalidQualitative { source, .. }) => model_error_code(source),
        CliError::Scorecard(ScorecardError::Scenario(_)) | CliError::Scenario(_) => "invalid scenario",
        CliError::Scorecard(ScorecardError::Taxonomy(_)) | CliError::Taxonomy(_) => "invalid override",
        CliError::Io { .. } | CliError::Session(SessionError::Ingest(_)) => {
            return error(seq, StatusCode::INTERNAL_SERVER_ERROR, "session store failure", e.to_string());
        }
        _ => "invalid request",
    };
    error(seq, StatusCode::BAD_REQUEST, code, e.to_string())
}

#[derive(Debug, Serialize)]
struct MutationResult<'a> {
    seq: u64,
    entry: &'a AuditEntry,
    assessment: &'a tiger_core::scorecard::Assessment,
}

async fn apply(state: &AppState, mutation: Mutation) -> Response {
    match state.commit(mutation, Utc::now()).await {
        Ok(s) => {
            let entry = s.session.log.last().expect("a mutation was just appended");
            let body = MutationResult { seq: s.seq(), entry, assessment: &s.evaluation.assessment };
            json_response(s.seq(), json_document(&body))
        }
        Err(e) => rejected(state.snapshot().seq(), &e),
    }
}

fn parse_body(seq: u64, body: &Bytes) -> Result<Value, Response> {
    serde_json::from_slice(body).map_err(|e| error(seq, StatusCode::BAD_REQUEST, "malformed json", e.to_string()))
}

fn field<'a>(seq: u64, v: &'a Value, name: &str) -> Result<&'a Value, Response> {
    v.get(name)
        .filter(|x| !x.is_null())
        .ok_or_else(|| error(seq, StatusCode::BAD_REQUEST, "missing field", format!("missing field `{name}`")))
}

fn string_field(seq: u64, v: &Value, name: &str) -> Result<String, Response> {
    field(seq, v, name)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| error(seq, StatusCode::BAD_REQUEST, "invalid field", format!("`{name}` must be a string")))
}

fn qualitative_entry(seq: u64, v: &Value) -> Result<QualitativeEntry, Response> {
    let characteristic: CharacteristicId = string_field(seq, v, "characteristic")?
        .parse()
        .map_err(|e: ModelError| error(seq, StatusCode::BAD_REQUEST, model_error_code(&e), e.to_string()))?;
    let raw = field(seq, v, "score")?;
    let score = raw
        .as_i64()
        .ok_or_else(|| error(seq, StatusCode::BAD_REQUEST, "invalid field", "`score` must be an integer"))?;
    if !(1..=5).contains(&score) {
        return Err(error(seq, StatusCode::BAD_REQUEST, "score out of range", format!("score {score} out of range (1-5)")));
    }
    let entered_at = match v.get("entered_at").filter(|x| !x.is_null()) {
        None => Utc::now(),
        Some(t) => serde_json::from_value(t.clone())
            .map_err(|e| error(seq, StatusCode::BAD_REQUEST, "invalid field", format!("`entered_at`: {e}")))?,
    };
    let entry = QualitativeEntry {
        characteristic,
        score: score as u8,
        evidence: string_field(seq, v, "evidence")?,
        assessor: string_field(seq, v, "assessor")?,
        entered_at,
    };
    entry
        .validate()
        .map_err(|e| error(seq, StatusCode::BAD_REQUEST, model_error_code(&e), e.to_string()))?;
    Ok(entry)
}

async fn post_qualitative(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let seq = state.snapshot().seq();
    let entry = match parse_body(seq, &body).and_then(|v| qualitative_entry(seq, &v)) {
        Ok(e) => e,
        Err(r) => return r,
    };
    apply(&state, Mutation::AddQualitative { entry }).await
}

#[derive(Debug, Deserialize)]
struct OverrideBody {
    address: String,
    class: Option<String>,
}

async fn post_override(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let seq = state.snapshot().seq();
    let b: OverrideBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return error(seq, StatusCode::BAD_REQUEST, "malformed json", e.to_string()),
    };
    let address: Address = match b.address.parse() {
        Ok(a) => a,
        Err(e) => return error(seq, StatusCode::BAD_REQUEST, "invalid address", format!("{e}")),
    };
    let class = match b.class.as_deref().map(str::parse::<AgentClass>).transpose() {
        Ok(c) => c,
        Err(e) => return error(seq, StatusCode::BAD_REQUEST, "invalid class", e.to_string()),
    };
    apply(&state, Mutation::OverrideAgent { address, class }).await
}

async fn post_scenario(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let seq = state.snapshot().seq();
    let v = match parse_body(seq, &body) {
        Ok(v) => v,
        Err(r) => return r,
    };
    let spec = match field(seq, &v, "spec") {
        Ok(Value::String(s)) => s.parse::<ScenarioSpec>().map_err(|e| e.to_string()),
        Ok(other) => serde_json::from_value::<ScenarioSpec>(other.clone()).map_err(|e| e.to_string()),
        Err(r) => return r,
    };
    match spec {
        Ok(spec) => apply(&state, Mutation::PushScenario { spec }).await,
        Err(e) => error(seq, StatusCode::BAD_REQUEST, "invalid scenario", e),
    }
}

async fn delete_scenario(State(state): State<Arc<AppState>>, Path(index): Path<String>) -> Response {
    let seq = state.snapshot().seq();
    match index.parse::<usize>() {
        Ok(index) => apply(&state, Mutation::RemoveScenario { index }).await,
        Err(_) => error(seq, StatusCode::BAD_REQUEST, "invalid index", format!("not a scenario index: {index}")),
    }
}

async fn get_summary(State(state): State<Arc<AppState>>) -> Response {
    let s = state.snapshot();
    let ws = &state.workspace;
    let ds = &ws.dataset.dataset;
    let body = json!({
        "dao_name": ds.meta.dao_name,
        "dao_category": ds.meta.dao_category,
        "snapshot_time": ds.meta.snapshot_time,
        "content_hash": ws.dataset.content_hash,
        "calibration_id": ws.calibration.id,
        "counts": {
            "balances": ds.balances.len(),
            "delegations": ds.delegations.len(),
            "proposals": ds.proposals.len(),
            "votes": ds.votes.len(),
            "agents": ds.agent_evidence.len(),
        },
        "warnings": ws.dataset.warnings,
        "scenarios": s.evaluation.scenarios,
    });
    json_response(s.seq(), json_document(&body))
}

async fn get_metrics(State(state): State<Arc<AppState>>) -> Response {
    let s = state.snapshot();
    json_response(s.seq(), s.metrics_json.clone())
}

async fn get_assessment(State(state): State<Arc<AppState>>) -> Response {
    let s = state.snapshot();
    json_response(s.seq(), s.assessment_json.clone())
}

async fn get_radar(State(state): State<Arc<AppState>>) -> Response {
    let s = state.snapshot();
    json_response(s.seq(), s.radar_json.clone())
}

async fn get_characteristics(State(state): State<Arc<AppState>>) -> Response {
    let s = state.snapshot();
    json_response(s.seq(), json_document(&s.evaluation.assessment.characteristics))
}

async fn get_characteristic(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let s = state.snapshot();
    match id.parse::<CharacteristicId>() {
        Ok(c) => json_response(s.seq(), json_document(s.evaluation.assessment.characteristic(c))),
        Err(e) => error(s.seq(), StatusCode::NOT_FOUND, "unknown characteristic", e.to_string()),
    }
}

async fn get_report(State(state): State<Arc<AppState>>) -> Response {
    let s = state.snapshot();
    respond(s.seq(), StatusCode::OK, "text/markdown; charset=utf-8", s.report.clone().into_bytes())
}

async fn get_audit(State(state): State<Arc<AppState>>) -> Response {
    let s = state.snapshot();
    let body = json!({
        "seq": s.seq(),
        "session_hash": s.session.content_hash(),
        "dataset_hash": s.session.dataset_hash,
        "calibration_id": s.session.calibration_id,
        "created_at": s.session.created_at,
        "log": s.session.log,
    });
    json_response(s.seq(), json_document(&body))
}

async fn not_found(State(state): State<Arc<AppState>>) -> Response {
    error(state.snapshot().seq(), StatusCode::NOT_FOUND, "not found", "no such endpoint")
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/dataset/summary", get(get_summary))
        .route("/metrics", get(get_metrics))
        .route("/assessment", get(get_assessment))
        .route("/radar", get(get_radar))
        .route("/characteristics", get(get_characteristics))
        .route("/characteristics/{id}", get(get_characteristic))
        .route("/qualitative", post(post_qualitative))
        .route("/agents/override", post(post_override))
        .route("/scenario", post(post_scenario))
        .route("/scenario/{index}", delete(delete_scenario))
        .route("/report", get(get_report))
        .route("/session/audit", get(get_audit));
    Router::new().nest("/api/v1", api).fallback(not_found).with_state(state)
}
