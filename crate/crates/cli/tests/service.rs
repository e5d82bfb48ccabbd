mod common;

use std::fs;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chrono::DateTime;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{compound, qualitative, s, tiger};
use tiger_cli::engine::Workspace;
use tiger_cli::read_qualitative;
use tiger_cli::service::{router, AppState, SEQ_HEADER};

struct Reply {
    status: StatusCode,
    seq: u64,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

fn app_with(store: Option<std::path::PathBuf>) -> (Router, Arc<AppState>) {
    let ws = Workspace::open(&compound(), "paper-2022").unwrap();
    let session = ws.new_session(&read_qualitative(&qualitative()).unwrap(), DateTime::UNIX_EPOCH).unwrap();
    let state = AppState::new(ws, session, store).unwrap();
    (router(state.clone()), state)
}

fn app() -> Router {
    app_with(None).0
}

async fn call(app: &Router, method: Method, path: &str, body: Option<Value>) -> Reply {
    let req = Request::builder().method(method).uri(path);
    let req = match body {
        Some(v) => req.header("content-type", "application/json").body(Body::from(v.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let seq = resp
        .headers()
        .get(SEQ_HEADER)
        .unwrap_or_else(|| panic!("{path}: missing sequence header"))
        .to_str()
        .unwrap()
        .parse()
        .unwrap();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, seq, body }
}

async fn get(app: &Router, path: &str) -> Reply {
    call(app, Method::GET, path, None).await
}

#[tokio::test]
async fn assessment_matches_cli_output() {
    let app = app();
    let r = get(&app, "/api/v1/assessment").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["overall"], 3.8);
    assert_eq!(r.seq, 4, "four seeded qualitative entries");

    let out = tempfile::tempdir().unwrap();
    let run = tiger(&["assess", "--dataset", s(&compound()), "--qualitative", s(&qualitative()), "--out", s(out.path())]);
    assert_eq!(run.code, 0);
    assert_eq!(r.body, fs::read(out.path().join("assessment.json")).unwrap());
    assert_eq!(get(&app, "/api/v1/radar").await.body, fs::read(out.path().join("radar.json")).unwrap());
    assert_eq!(get(&app, "/api/v1/report").await.body, fs::read(out.path().join("report.md")).unwrap());
}

#[tokio::test]
async fn read_endpoints() {
    let app = app();
    let summary = get(&app, "/api/v1/dataset/summary").await.json();
    assert_eq!(summary["dao_name"], "Compound");
    assert_eq!(summary["counts"]["proposals"], 114);
    let metrics = get(&app, "/api/v1/metrics").await.json();
    assert_eq!(metrics["via_nakamoto"], 12);
    let all = get(&app, "/api/v1/characteristics").await.json();
    assert_eq!(all.as_array().unwrap().len(), 15);
    let one = get(&app, "/api/v1/characteristics/voting_delegation").await;
    assert_eq!(one.json()["score"], 1);
    let missing = get(&app, "/api/v1/characteristics/nonsense").await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(missing.json()["error"], "unknown characteristic");
    assert_eq!(get(&app, "/api/v1/nowhere").await.status, StatusCode::NOT_FOUND);
    let audit = get(&app, "/api/v1/session/audit").await.json();
    assert_eq!(audit["log"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn qualitative_validation() {
    let app = app();
    let body = |score: i64| json!({"characteristic": "soft_power", "score": score, "evidence": "e", "assessor": "a"});
    for bad in [6, 0, -1, 300] {
        let r = call(&app, Method::POST, "/api/v1/qualitative", Some(body(bad))).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST);
        assert_eq!(r.json()["error"], "score out of range");
        assert_eq!(r.seq, 4);
    }
    let r = call(
        &app,
        Method::POST,
        "/api/v1/qualitative",
        Some(json!({"characteristic": "inflation", "score": 3, "evidence": "e", "assessor": "a"})),
    )
    .await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"], "not a qualitative characteristic");
    let r = call(&app, Method::POST, "/api/v1/qualitative", Some(json!({"score": 3}))).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);

    let r = call(&app, Method::POST, "/api/v1/qualitative", Some(body(4))).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.seq, 5);
    let v = r.json();
    assert_eq!(v["seq"], 5);
    let row = v["assessment"]["characteristics"].as_array().unwrap().iter().find(|c| c["id"] == "soft_power").unwrap().clone();
    assert_eq!(row["score"], 4);
    assert_eq!(v["assessment"]["radar"]["values"][4], json!((4.0f64 + 4.0 + 2.0) / 3.0));
    assert_eq!(get(&app, "/api/v1/assessment").await.seq, 5);
}

#[tokio::test]
async fn scenario_round_trip_restores_assessment() {
    let app = app();
    let initial = get(&app, "/api/v1/assessment").await;
    let initial_report = get(&app, "/api/v1/report").await.body;

    let r = call(&app, Method::POST, "/api/v1/scenario", Some(json!({"spec": {"kind": "vesting_complete"}}))).await;
    assert_eq!(r.status, StatusCode::OK, "{}", String::from_utf8_lossy(&r.body));
    let changed = get(&app, "/api/v1/assessment").await;
    assert_ne!(changed.body, initial.body);
    assert_eq!(changed.seq, initial.seq + 1);

    let r = call(&app, Method::DELETE, "/api/v1/scenario/0", None).await;
    assert_eq!(r.status, StatusCode::OK);
    let restored = get(&app, "/api/v1/assessment").await;
    assert_eq!(restored.body, initial.body);
    assert_eq!(restored.seq, initial.seq + 2);
    assert_eq!(get(&app, "/api/v1/report").await.body, initial_report);

    let r = call(&app, Method::DELETE, "/api/v1/scenario/0", None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"], "invalid mutation");
    let r = call(&app, Method::DELETE, "/api/v1/scenario/x", None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);

    // compact form; a scenario that fails to apply is not committed
    let r = call(&app, Method::POST, "/api/v1/scenario", Some(json!({"spec": "remove_delegate:0x00000000000000000000000000000000000000ff"}))).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"], "invalid scenario");
    assert_eq!(r.seq, initial.seq + 2);
}

#[tokio::test]
async fn overrides_and_persistence() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("session.json");
    let (app, _) = app_with(Some(store.clone()));
    let delegate = get(&app, "/api/v1/characteristics/voting_delegation").await;
    assert_eq!(delegate.json()["metric_values"]["distinct_via_delegates"], 60.0);

    let classify = tiger(&["classify", "--dataset", s(&compound())]);
    let v: Value = serde_json::from_str(&classify.stdout).unwrap();
    let via = v["profiles"].as_array().unwrap().iter().find(|p| p["class"] == "VIA").unwrap()["address"].clone();

    let bad = call(&app, Method::POST, "/api/v1/agents/override", Some(json!({"address": "0x12", "class": "VIA"}))).await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    let bad = call(&app, Method::POST, "/api/v1/agents/override", Some(json!({"address": via, "class": "XYZ"}))).await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);

    let r = call(&app, Method::POST, "/api/v1/agents/override", Some(json!({"address": via, "class": "UIA"}))).await;
    assert_eq!(r.status, StatusCode::OK);
    let (saved, _) = tiger_core::session::load_session(&store).unwrap();
    assert_eq!(saved.seq(), r.seq);
    assert_eq!(saved.replay().unwrap().overrides.len(), 1);

    // CLI on the stored session agrees with the service
    let out = dir.path().join("out");
    tiger(&["assess", "--session", s(&store), "--out", s(&out)]);
    assert_eq!(get(&app, "/api/v1/assessment").await.body, fs::read(out.join("assessment.json")).unwrap());

    let r = call(&app, Method::POST, "/api/v1/agents/override", Some(json!({"address": via, "class": null}))).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["entry"]["mutation"]["op"], "override_agent");
}

#[tokio::test]
async fn concurrent_writes_serialize() {
    let app = app();
    let mut tasks = Vec::new();
    for i in 0..16 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let body = json!({"characteristic": "accountability", "score": 1 + i % 5, "evidence": "e", "assessor": "a"});
            call(&app, Method::POST, "/api/v1/qualitative", Some(body)).await.seq
        }));
    }
    let mut seqs = Vec::new();
    for t in tasks {
        seqs.push(t.await.unwrap());
    }
    seqs.sort();
    assert_eq!(seqs, (5..21).collect::<Vec<u64>>());
    let audit = get(&app, "/api/v1/session/audit").await.json();
    let log: Vec<u64> = audit["log"].as_array().unwrap().iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert_eq!(log, (1..21).collect::<Vec<u64>>());
}
