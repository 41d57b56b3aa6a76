#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request};
use axum::Router;
use dungeon_studio::formats::{parse_blocks, read_map, ApiMap};
use dungeon_studio::service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

pub struct Reply {
    pub status: u16,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

pub fn app(dir: &Path, budget: usize) -> Router {
    let config = ServiceConfig { data_dir: dir.to_path_buf(), budget: Some(budget), default_seed: None };
    router(Arc::new(AppState::load(config).unwrap()))
}

pub async fn send(app: &Router, method: Method, uri: &str, body: Option<String>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status().as_u16();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    Reply { status, body: String::from_utf8(bytes.to_vec()).unwrap() }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    send(app, Method::POST, uri, Some(body.to_string())).await
}

pub fn fixture(name: &str) -> ApiMap {
    read_map(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).unwrap().into()
}

/// Everything a designer sees during one scripted session.
pub struct Transcript {
    pub session_id: String,
    pub payloads: Vec<Reply>,
    pub log: Reply,
    pub export: Reply,
}

/// Creates a session, submits a fixture, then keeps the first two suggestions
/// and likes the third each round until five levels are stored.
pub async fn scripted_session(app: &Router, user_id: &str, seed: u64) -> Transcript {
    let mut payloads = Vec::new();
    let created = post(app, "/api/sessions", json!({ "user_id": user_id, "seed": seed })).await;
    assert_eq!(created.status, 201, "{}", created.body);
    let id = created.json()["session_id"].as_str().unwrap().to_string();
    payloads.push(created);

    let mut step = post(app, &format!("/api/sessions/{id}/initial"), json!({ "map": fixture("c_balanced.map") })).await;
    for _ in 0..10 {
        assert_eq!(step.status, 200, "{}", step.body);
        let v = step.json();
        payloads.push(step);
        if v["complete"].as_bool().unwrap() {
            break;
        }
        let suggestions = v["suggestions"].as_array().unwrap().clone();
        let decisions: Vec<Value> = suggestions
            .iter()
            .enumerate()
            .take(3)
            .map(|(i, map)| json!({ "index": i, "map": map, "liked": i == 2, "kept": i < 2 }))
            .collect();
        payloads.push(get(app, &format!("/api/sessions/{id}")).await);
        step = post(app, &format!("/api/sessions/{id}/iterate"), json!({ "decisions": decisions })).await;
    }
    let export = get(app, &format!("/api/sessions/{id}/export")).await;
    let log = get(app, &format!("/api/sessions/{id}/log")).await;
    Transcript { session_id: id, payloads, log, export }
}

/// Words that would reveal the experimental group.
pub fn leaks_group(body: &str) -> bool {
    let lower = body.to_ascii_lowercase();
    ["group", "mode", "control", "\"ga\""].iter().any(|w| lower.contains(w))
}

/// Checks the transcript against the API contract, returning a failure message.
pub fn check_transcript(t: &Transcript) -> Result<(), String> {
    let last = t.payloads.last().ok_or("no payloads")?.json();
    if last["complete"] != true {
        return Err("session did not complete".into());
    }
    let levels = last["levels"].as_array().map_or(0, |l| l.len());
    if levels != 5 {
        return Err(format!("{levels} levels"));
    }
    if let Some(p) = t.payloads.iter().find(|p| leaks_group(&p.body)) {
        return Err(format!("group leaked: {}", p.body));
    }
    if t.export.status != 200 || leaks_group(&t.export.body) {
        return Err(format!("export: {} {}", t.export.status, t.export.body));
    }
    let blocks = parse_blocks(&t.export.body).map_err(|e| e.to_string())?;
    if blocks.len() < 5 {
        return Err(format!("export has {} maps", blocks.len()));
    }
    let log = t.log.json();
    if !matches!(log["group"].as_str(), Some("ga" | "control")) {
        return Err(format!("log lacks group: {}", t.log.body));
    }
    Ok(())
}
