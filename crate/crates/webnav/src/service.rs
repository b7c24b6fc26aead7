//! HTTP session service. Each session wraps one [`Episode`]; steps on a
//! session are serialized by a per-session lock, and finished records are
//! appended to an optional JSON Lines log.
//!
//! Endpoints:
//! - `POST /v1/sessions` creates a session.
//! - `GET /v1/sessions/{id}` returns the current view.
//! - `POST /v1/sessions/{id}/actions` submits one command.
//! - `POST /v1/sessions/{id}/answer` submits the final answer.
//! - `GET /v1/sessions/{id}/record` returns the record so far.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use axum::extract::{FromRequest, Path as UrlPath, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use webnav_core::env::{check_citations, CitationReport};
use webnav_core::{EndReason, EnvConfig, EnvError, Episode, EpisodeRecord, Phase, Quote, WebBackend};

pub const DEFAULT_TTL: Duration = Duration::from_secs(2 * 60 * 60);

pub type SharedBackend = Arc<dyn WebBackend + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Live,
    Offline,
}

struct Session {
    episode: Episode,
    backend: SharedBackend,
    last_active: Instant,
    logged: bool,
}

pub struct AppState {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    backends: HashMap<BackendChoice, SharedBackend>,
    default_backend: BackendChoice,
    env: EnvConfig,
    ttl: Duration,
    log: Option<Mutex<File>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl AppState {
    pub fn new(default_backend: BackendChoice, backend: SharedBackend, env: EnvConfig) -> Self {
        Self {
            sessions: Mutex::new(HashMap::new()),
            backends: HashMap::from([(default_backend, backend)]),
            default_backend,
            env,
            ttl: DEFAULT_TTL,
            log: None,
        }
    }

    pub fn with_backend(mut self, choice: BackendChoice, backend: SharedBackend) -> Self {
        self.backends.insert(choice, backend);
        self
    }

    pub fn with_ttl(mut self, ttl: Duration) -> Self {
        self.ttl = ttl;
        self
    }

    /// Appends every finished record to `path`.
    pub fn with_record_log(mut self, path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.log = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn session_count(&self) -> usize {
        lock(&self.sessions).len()
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn expire_sessions(&self) -> usize {
        let now = Instant::now();
        let mut sessions = lock(&self.sessions);
        let before = sessions.len();
        sessions.retain(|_, s| now.duration_since(lock(s).last_active) <= self.ttl);
        before - sessions.len()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let mut sessions = lock(&self.sessions);
        let session = sessions.get(id).cloned().ok_or(ApiError::NotFound)?;
        if lock(&session).last_active.elapsed() > self.ttl {
            sessions.remove(id);
            return Err(ApiError::NotFound);
        }
        Ok(session)
    }

    fn persist(&self, session: &mut Session) -> Result<(), ApiError> {
        if session.logged || session.episode.end_reason().is_none() {
            return Ok(());
        }
        session.logged = true;
        if let Some(log) = &self.log {
            let mut line = serde_json::to_string(&session.episode.record()).map_err(|e| ApiError::Internal(e.to_string()))?;
            line.push('\n');
            lock(log)
                .write_all(line.as_bytes())
                .map_err(|e| ApiError::Internal(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound,
    Conflict(String),
    Internal(String),
}

impl From<EnvError> for ApiError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::WrongPhase { .. } | EnvError::NoQuotes => ApiError::Conflict(e.to_string()),
            other => ApiError::BadRequest(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound => (StatusCode::NOT_FOUND, "no such session".to_string()),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(json!({ "error": message }))).into_response()
    }
}

/// JSON request body whose rejections use the `{"error"}` shape.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e| ApiError::BadRequest(e.body_text()))
    }
}

/// Per-session overrides of the service's environment defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub max_actions: Option<usize>,
    pub max_quote_tokens: Option<usize>,
    pub viewport_lines: Option<usize>,
    pub search_result_count: Option<usize>,
    pub max_observation_chars: Option<usize>,
}

impl ConfigOverrides {
    fn apply(&self, base: &EnvConfig) -> EnvConfig {
        let mut c = base.clone();
        c.max_actions = self.max_actions.unwrap_or(c.max_actions);
        c.max_quote_tokens = self.max_quote_tokens.unwrap_or(c.max_quote_tokens);
        c.viewport_lines = self.viewport_lines.unwrap_or(c.viewport_lines);
        c.search_result_count = self.search_result_count.unwrap_or(c.search_result_count);
        c.max_observation_chars = self.max_observation_chars.or(c.max_observation_chars);
        c
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub question: String,
    #[serde(default)]
    pub config: ConfigOverrides,
    pub backend: Option<BackendChoice>,
    /// Also censors pages overlapping this text.
    pub reference_answer: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct ActionRequest {
    pub action: String,
    /// If given, the step is rejected unless the record has exactly this many
    /// steps, so that two clients cannot both act on the same state.
    pub expected_step: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct AnswerRequest {
    pub answer: String,
}

/// What a client needs to show or drive the session.
#[derive(Debug, Serialize)]
pub struct View {
    pub session_id: String,
    pub phase: &'static str,
    pub end_reason: Option<EndReason>,
    pub question: String,
    pub step: usize,
    pub actions_left: usize,
    pub quotes: Vec<Quote>,
    /// Present while browsing.
    pub observation: Option<String>,
    /// Present while answering.
    pub answer_prompt: Option<String>,
}

fn view(id: &str, episode: &Episode) -> View {
    let state = episode.state();
    let phase = episode.phase();
    View {
        session_id: id.to_string(),
        phase: phase.name(),
        end_reason: episode.end_reason(),
        question: state.question().to_string(),
        step: episode.steps().len(),
        actions_left: state.actions_left(),
        quotes: state.quotes().to_vec(),
        observation: (phase == Phase::Browsing).then(|| episode.observation().ok()).flatten(),
        answer_prompt: matches!(phase, Phase::Answering(_))
            .then(|| episode.answer_prompt().ok())
            .flatten(),
    }
}

#[derive(Debug, Serialize)]
pub struct RecordResponse {
    pub in_progress: bool,
    pub record: EpisodeRecord,
    /// Advisory check of `[k]` citations; absent until there is an answer.
    pub citations: Option<CitationReport>,
}

fn record_response(episode: &Episode) -> RecordResponse {
    let record = episode.record();
    let citations = record.answer.as_deref().map(|a| check_citations(a, record.quotes.len()));
    RecordResponse {
        in_progress: record.end_reason.is_none(),
        record,
        citations,
    }
}

fn new_session_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

async fn create(State(app): State<Arc<AppState>>, Body(req): Body<CreateRequest>) -> Result<impl IntoResponse, ApiError> {
    let choice = req.backend.unwrap_or(app.default_backend);
    let backend = app
        .backends
        .get(&choice)
        .cloned()
        .ok_or_else(|| ApiError::BadRequest(format!("backend {choice:?} is not configured")))?;
    let config = req.config.apply(&app.env);
    let mut state = webnav_core::BrowserState::new(req.question, config)?;
    if let Some(reference) = req.reference_answer {
        state = state.with_reference_answer(reference);
    }
    let episode = Episode::from_state(state);
    let id = new_session_id();
    let body = view(&id, &episode);
    let session = Session {
        episode,
        backend,
        last_active: Instant::now(),
        logged: false,
    };
    lock(&app.sessions).insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn show(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<View>, ApiError> {
    let session = app.session(&id)?;
    let guard = lock(&session);
    Ok(Json(view(&id, &guard.episode)))
}

async fn act(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Body(req): Body<ActionRequest>,
) -> Result<Json<View>, ApiError> {
    let session = app.session(&id)?;
    let app2 = app.clone();
    tokio::task::spawn_blocking(move || {
        let mut guard = lock(&session);
        let s = &mut *guard;
        if let Some(expected) = req.expected_step {
            let actual = s.episode.steps().len();
            if expected != actual {
                return Err(ApiError::Conflict(format!("session is at step {actual}, not {expected}")));
            }
        }
        let backend = s.backend.clone();
        s.episode.submit(&req.action, &backend)?;
        s.last_active = Instant::now();
        app2.persist(s)?;
        Ok(Json(view(&id, &s.episode)))
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn answer(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Body(req): Body<AnswerRequest>,
) -> Result<Json<RecordResponse>, ApiError> {
    let session = app.session(&id)?;
    let mut guard = lock(&session);
    guard.episode.answer(&req.answer)?;
    guard.last_active = Instant::now();
    app.persist(&mut guard)?;
    Ok(Json(record_response(&guard.episode)))
}

async fn record(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<RecordResponse>, ApiError> {
    let session = app.session(&id)?;
    let guard = lock(&session);
    Ok(Json(record_response(&guard.episode)))
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/sessions", post(create))
        .route("/v1/sessions/{id}", get(show))
        .route("/v1/sessions/{id}/actions", post(act))
        .route("/v1/sessions/{id}/answer", post(answer))
        .route("/v1/sessions/{id}/record", get(record))
        .with_state(app)
}

/// Serves until the process is stopped, sweeping idle sessions every minute.
pub async fn serve(app: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let sweeper = app.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.expire_sessions();
        }
    });
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app)).await
}
