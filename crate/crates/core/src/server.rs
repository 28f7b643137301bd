//! Session API over HTTP.
//!
//! | method | path                   | body               |
//! |--------|------------------------|--------------------|
//! | POST   | `/sessions`            | `{hydra, labels}`  |
//! | GET    | `/sessions/{id}`       |                    |
//! | GET    | `/sessions/{id}/moves` |                    |
//! | POST   | `/sessions/{id}/apply` | `{index, digest}`  |
//! | POST   | `/sessions/{id}/undo`  |                    |
//!
//! Every response is a schema `v1` document.

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::diagram::compare;
use crate::game::{GameError, GameState, MoveList};
use crate::moves::{Move, MoveConfig};
use crate::textio::{parse_hydra, parse_labels, Document, ParseError, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("unknown session `{0}`")]
    NotFound(String),
    #[error("stale move: state digest is `{current}`, request carried `{sent}`")]
    Stale { current: String, sent: String },
    #[error("move index {index} out of range ({count} moves)")]
    Index { index: usize, count: usize },
    #[error("nothing to undo")]
    EmptyUndo,
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Game(GameError),
    #[error("persistence failed: {0}")]
    Io(#[from] io::Error),
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Index { index, count } => ApiError::Index { index, count },
            other => ApiError::Game(other),
        }
    }
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Stale { .. } => StatusCode::CONFLICT,
            ApiError::Index { .. } | ApiError::EmptyUndo => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Parse(_) | ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Game(_) | ApiError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub status: u16,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub column: Option<usize>,
}

impl Document for ErrorBody {
    const KIND: &'static str = "error";
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        let (line, column) = match &self {
            ApiError::Parse(ParseError::Syntax { line, column, .. })
            | ApiError::Parse(ParseError::Sort { line, column, .. }) => (Some(*line), Some(*column)),
            _ => (None, None),
        };
        let body = ErrorBody {
            status: status.as_u16(),
            message: self.to_string(),
            line,
            column,
        };
        (status, Json(body.to_document())).into_response()
    }
}

/// A live game with its undo stack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub state: GameState,
    pub undo: Vec<GameState>,
    pub created: u64,
    pub updated: u64,
}

impl Document for Session {
    const KIND: &'static str = "session";
}

/// What clients see of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub state: GameState,
    pub digest: String,
    pub moves: Vec<Move>,
    pub measure: String,
    pub terminal: bool,
    pub can_undo: bool,
}

impl Document for SessionView {
    const KIND: &'static str = "session_view";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplyResult {
    pub session: SessionView,
    pub applied: Move,
    pub old_measure: String,
    pub new_measure: String,
    /// `Less`, `Equal` or `Greater`, comparing new to old.
    pub verdict: String,
}

impl Document for ApplyResult {
    const KIND: &'static str = "apply_result";
}

#[derive(Debug, Deserialize)]
struct CreateRequest {
    #[serde(default)]
    schema: Option<String>,
    hydra: String,
    #[serde(default)]
    labels: String,
}

#[derive(Debug, Deserialize)]
struct ApplyRequest {
    #[serde(default)]
    schema: Option<String>,
    index: usize,
    digest: String,
}

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    pub moves: MoveConfig,
    /// One `<id>.json` per session, rewritten on every mutation.
    pub data_dir: Option<PathBuf>,
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
}

pub struct AppState {
    config: ServerConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

type Shared = Arc<AppState>;

impl AppState {
    /// Loads persisted sessions from `config.data_dir`, if any.
    pub fn new(config: ServerConfig) -> Result<Self, ApiError> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &config.data_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "json") {
                    let s = load_session(&path)?;
                    sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
                }
            }
        }
        Ok(AppState {
            config,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("session map lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    fn persist(&self, s: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.config.data_dir else {
            return Ok(());
        };
        let path = dir.join(format!("{}.json", s.id));
        let tmp = dir.join(format!("{}.json.tmp", s.id));
        let text = serde_json::to_vec_pretty(&s.to_document()).expect("documents serialize");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn view(&self, s: &Session) -> Result<SessionView, ApiError> {
        let moves = s.state.moves(self.config.moves)?;
        Ok(SessionView {
            id: s.id.clone(),
            digest: s.state.digest(),
            measure: s.state.measure()?.to_string(),
            terminal: moves.is_empty(),
            can_undo: !s.undo.is_empty(),
            moves,
            state: s.state.clone(),
        })
    }
}

fn load_session(path: &Path) -> Result<Session, ApiError> {
    let bad = |m: String| ApiError::BadRequest(format!("{}: {m}", path.display()));
    let text = std::fs::read(path)?;
    let doc: serde_json::Value = serde_json::from_slice(&text).map_err(|e| bad(e.to_string()))?;
    let s = Session::from_document(&doc).map_err(|e| bad(e.to_string()))?;
    s.state.validate().map_err(|e| bad(e.to_string()))?;
    Ok(s)
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn body<T: for<'de> Deserialize<'de>>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::BadRequest(e.to_string()))
}

fn check_schema(schema: &Option<String>) -> Result<(), ApiError> {
    match schema {
        Some(s) if s != SCHEMA_VERSION => Err(ApiError::BadRequest(format!(
            "unsupported schema version `{s}`"
        ))),
        _ => Ok(()),
    }
}

async fn create(State(app): State<Shared>, bytes: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateRequest = body(&bytes)?;
    check_schema(&req.schema)?;
    let hydra = parse_hydra(&req.hydra)?;
    let labels = parse_labels(&req.labels)?;
    let state = GameState::new(hydra, labels)?;
    let t = now();
    let session = Session {
        id: format!("{:016x}", rand::random::<u64>()),
        state,
        undo: Vec::new(),
        created: t,
        updated: t,
    };
    let view = app.view(&session)?;
    app.persist(&session)?;
    app.sessions
        .write()
        .expect("session map lock")
        .insert(session.id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view.to_document())))
}

async fn show(State(app): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let s = app.get(&id)?;
    let s = s.lock().expect("session lock");
    Ok(Json(app.view(&s)?.to_document()))
}

async fn moves(State(app): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let s = app.get(&id)?;
    let s = s.lock().expect("session lock");
    let st = &s.state;
    let list = MoveList::new(&st.hydra, &st.labels, st.level, app.config.moves)?;
    Ok(Json(list.to_document()))
}

async fn apply(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    bytes: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let req: ApplyRequest = body(&bytes)?;
    check_schema(&req.schema)?;
    let s = app.get(&id)?;
    let mut s = s.lock().expect("session lock");
    let current = s.state.digest();
    if req.digest != current {
        return Err(ApiError::Stale {
            current,
            sent: req.digest,
        });
    }
    let moves = s.state.moves(app.config.moves)?;
    let mv = moves.get(req.index).ok_or(ApiError::Index {
        index: req.index,
        count: moves.len(),
    })?;
    let next = s.state.apply(mv, app.config.moves)?;
    let old = s.state.measure()?;
    let new = next.measure()?;
    let previous = std::mem::replace(&mut s.state, next);
    s.undo.push(previous);
    s.updated = now();
    app.persist(&s)?;
    let result = ApplyResult {
        session: app.view(&s)?,
        applied: mv.clone(),
        old_measure: old.to_string(),
        new_measure: new.to_string(),
        verdict: format!("{:?}", compare(&new, &old)),
    };
    Ok(Json(result.to_document()))
}

async fn undo(State(app): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let s = app.get(&id)?;
    let mut s = s.lock().expect("session lock");
    let prev = s.undo.pop().ok_or(ApiError::EmptyUndo)?;
    s.state = prev;
    s.updated = now();
    app.persist(&s)?;
    Ok(Json(app.view(&s)?.to_document()))
}

pub fn router(app: Shared) -> Router {
    let origin = match &app.config.cors_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => AllowOrigin::any(),
        },
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods(tower_http::cors::Any)
        .allow_headers(tower_http::cors::Any);
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/moves", get(moves))
        .route("/sessions/{id}/apply", post(apply))
        .route("/sessions/{id}/undo", post(undo))
        .layer(cors)
        .with_state(app)
}

pub async fn serve(addr: SocketAddr, config: ServerConfig) -> Result<(), ApiError> {
    let app = Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(app)).await?;
    Ok(())
}
