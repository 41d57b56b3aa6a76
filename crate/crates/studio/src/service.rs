//! HTTP API over sessions, persisted as journals.
//!
//! Each session sits behind its own read/write lock, so mutations on one
//! session run in order while other sessions proceed. Suggestion generation
//! runs on the blocking pool.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dungeon_core::session::SessionError;
use dungeon_core::{Session, SessionConfig};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use crate::formats::ApiMap;
use crate::journal::{self, Applied, ApplyError, DecisionRecord, Event, Journal, JournalError};

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Overrides the evaluation budget of new sessions.
    pub budget: Option<usize>,
    /// Seed for sessions created without one; random when absent.
    pub default_seed: Option<u64>,
}

impl ServiceConfig {
    fn session_config(&self) -> SessionConfig {
        match self.budget {
            Some(b) => SessionConfig::with_budget(b),
            None => SessionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(skip)]
    pub status: u16,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> ApiError {
        ApiError { code: code.into(), message: message.into(), status: status.as_u16() }
    }

    fn not_found(id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session {id}"))
    }

    fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let (status, code) = match &e {
            SessionError::EmptyUserId => (StatusCode::UNPROCESSABLE_ENTITY, "empty_user_id"),
            SessionError::NotAtStart => (StatusCode::CONFLICT, "not_at_start"),
            SessionError::NotStarted => (StatusCode::CONFLICT, "not_started"),
            SessionError::SessionComplete => (StatusCode::CONFLICT, "session_complete"),
            SessionError::SessionIncomplete => (StatusCode::CONFLICT, "session_incomplete"),
            SessionError::InvalidMap(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_map"),
            SessionError::UnknownSuggestionIndex(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unknown_suggestion_index"),
            SessionError::DuplicateSuggestionIndex(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "duplicate_suggestion_index")
            }
            SessionError::Evolution(_) => (StatusCode::INTERNAL_SERVER_ERROR, "optimisation_failed"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<ApplyError> for ApiError {
    fn from(e: ApplyError) -> ApiError {
        match e {
            ApplyError::Parse(p) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_map", p.to_string()),
            ApplyError::Session(s) => s.into(),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<JournalError> for ApiError {
    fn from(e: JournalError) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "journal_error", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> ApiError {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub user_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct MapRequest {
    pub map: ApiMap,
}

#[derive(Debug, Deserialize)]
pub struct IterateRequest {
    pub decisions: Vec<DecisionRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionView {
    pub original: ApiMap,
    pub current: ApiMap,
}

/// Everything a client may see about a session. The group is never included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub iteration: usize,
    pub levels: Vec<ApiMap>,
    pub liked_count: usize,
    pub suggestions: Vec<SuggestionView>,
    pub blank_creations: usize,
    pub complete: bool,
}

impl SessionView {
    fn of(s: &Session) -> SessionView {
        SessionView {
            session_id: s.id().into(),
            iteration: s.iteration(),
            levels: s.levels().iter().map(|&m| m.into()).collect(),
            liked_count: s.liked().len(),
            suggestions: s
                .suggestions()
                .iter()
                .map(|x| SuggestionView { original: x.original.into(), current: x.current.into() })
                .collect(),
            blank_creations: s.blank_creations(),
            complete: s.is_complete(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreatedView {
    pub session_id: String,
    pub iteration: usize,
    pub levels: Vec<ApiMap>,
    pub complete: bool,
}

/// Reply to a mutation: new suggestions, or the final levels on completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepView {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestions: Option<Vec<ApiMap>>,
    pub iteration: usize,
    pub levels: Vec<ApiMap>,
    pub complete: bool,
}

#[derive(Debug)]
struct Entry {
    session: Session,
    journal: Journal,
}

#[derive(Debug)]
pub struct AppState {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<RwLock<Entry>>>>,
}

impl AppState {
    /// Replays every journal in the data directory, creating it if needed.
    pub fn load(config: ServiceConfig) -> Result<AppState, JournalError> {
        std::fs::create_dir_all(&config.data_dir)
            .map_err(|source| JournalError::Io { path: config.data_dir.display().to_string(), source })?;
        let sessions = journal::load_dir(&config.data_dir)?
            .into_iter()
            .map(|(journal, session)| (session.id().to_string(), Arc::new(RwLock::new(Entry { session, journal }))))
            .collect();
        Ok(AppState { config, sessions: RwLock::new(sessions) })
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }

    async fn entry(&self, id: &str) -> Result<Arc<RwLock<Entry>>, ApiError> {
        self.sessions.read().await.get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(state_view))
        .route("/api/sessions/{id}/initial", post(initial))
        .route("/api/sessions/{id}/iterate", post(iterate))
        .route("/api/sessions/{id}/blank", post(blank))
        .route("/api/sessions/{id}/log", get(log))
        .route("/api/sessions/{id}/export", get(export))
        .with_state(state)
}

/// Serves until `shutdown` resolves or the listener fails.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Shared,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

async fn create(
    State(state): State<Shared>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<CreatedView>), ApiError> {
    let Json(req) = body?;
    let seed = req.seed.or(state.config.default_seed).unwrap_or_else(rand::random);
    let session_id = uuid::Uuid::new_v4().simple().to_string();
    let event = Event::SessionCreated {
        session_id: session_id.clone(),
        user_id: req.user_id,
        seed,
        config: state.config.session_config(),
        mode: None,
    };
    journal::create_session(&event)?;
    let dir = state.config.data_dir.clone();
    let (journal, session) = tokio::task::spawn_blocking(move || Journal::create(&dir, &event))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let view = CreatedView { session_id: session_id.clone(), iteration: 0, levels: Vec::new(), complete: false };
    state.sessions.write().await.insert(session_id, Arc::new(RwLock::new(Entry { session, journal })));
    Ok((StatusCode::CREATED, Json(view)))
}

/// Applies `event` to a copy of the session on the blocking pool, journals it,
/// then commits. Any failure leaves the session as it was.
async fn mutate(state: &AppState, id: &str, event: Event) -> Result<(Applied, SessionView), ApiError> {
    let entry = state.entry(id).await?;
    let mut guard = entry.write_owned().await;
    tokio::task::spawn_blocking(move || {
        let mut next = guard.session.clone();
        let applied = journal::apply(&mut next, &event)?;
        guard.journal.record(&event, &applied)?;
        guard.session = next;
        Ok((applied, SessionView::of(&guard.session)))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
}

fn step(applied: Applied, view: SessionView) -> Json<StepView> {
    let suggestions = match applied {
        Applied::Complete => None,
        _ => Some(view.suggestions.into_iter().map(|s| s.current).collect()),
    };
    Json(StepView { suggestions, iteration: view.iteration, levels: view.levels, complete: view.complete })
}

async fn initial(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<MapRequest>, JsonRejection>,
) -> Result<Json<StepView>, ApiError> {
    let Json(req) = body?;
    let (applied, view) = mutate(&state, &id, Event::InitialSubmitted { map: req.map }).await?;
    Ok(step(applied, view))
}

async fn iterate(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<IterateRequest>, JsonRejection>,
) -> Result<Json<StepView>, ApiError> {
    let Json(req) = body?;
    let (applied, view) = mutate(&state, &id, Event::Iterated { decisions: req.decisions }).await?;
    Ok(step(applied, view))
}

async fn blank(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<MapRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let Json(req) = body?;
    let (_, view) = mutate(&state, &id, Event::BlankSubmitted { map: req.map }).await?;
    Ok(Json(view))
}

async fn state_view(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let entry = state.entry(&id).await?;
    let guard = entry.read().await;
    Ok(Json(SessionView::of(&guard.session)))
}

async fn log(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id).await?;
    let guard = entry.read().await;
    Ok(Json(guard.session.export_log()).into_response())
}

async fn export(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id).await?;
    let guard = entry.read().await;
    let text = guard.session.export_final_screen()?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}
