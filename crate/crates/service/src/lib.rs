//! HTTP session service. Each session is an exploration of one bundle whose
//! state is the fold of its event log; the log is replayed on startup.

mod error;
pub mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use sagex_core::es::{CandidateAction, Explanans, HeuristicOrder, InfoNode, Interaction};
use sagex_core::exploration::Exploration;
use sagex_core::format::parse_bundle;
use sagex_core::model::Mode;
use sagex_core::narrative::{ExportFormat, Narrative};
use sagex_core::validate::{validate_explainability, Violation};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{Mutex, RwLock};

pub use error::ApiError;
use store::{Event, EventKind, Store, StoreError};

#[derive(Debug, Clone)]
pub struct Config {
    pub listen: SocketAddr,
    pub storage: PathBuf,
    pub heuristic_order: HeuristicOrder,
}

struct Session {
    id: String,
    exploration: Exploration,
    events: Vec<Event>,
}

pub struct AppState {
    store: Store,
    order: HeuristicOrder,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

/// A session that could not be replayed at startup.
#[derive(Debug)]
pub struct SkippedSession {
    pub id: String,
    pub reason: String,
}

impl AppState {
    /// Opens the storage directory and replays every session found there.
    pub fn open(storage: impl Into<PathBuf>, order: HeuristicOrder) -> Result<(Self, Vec<SkippedSession>), StoreError> {
        let store = Store::open(storage)?;
        let mut sessions = HashMap::new();
        let mut skipped = Vec::new();
        for id in store.session_ids()? {
            match replay(&store, &id) {
                Ok(s) => {
                    sessions.insert(id, Arc::new(Mutex::new(s)));
                }
                Err(reason) => {
                    tracing::warn!(session = %id, %reason, "skipping session that does not replay");
                    skipped.push(SkippedSession { id, reason });
                }
            }
        }
        Ok((
            AppState {
                store,
                order,
                sessions: RwLock::new(sessions),
            },
            skipped,
        ))
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))
    }
}

fn replay(store: &Store, id: &str) -> Result<Session, String> {
    let stored = store.load(id).map_err(|e| e.to_string())?;
    let bundle = parse_bundle(&stored.document).map_err(|e| e.to_string())?;
    let mut exploration =
        Exploration::start(bundle, stored.mode, stored.heuristic_order).map_err(|e| e.to_string())?;
    for event in &stored.events[1..] {
        match &event.kind {
            EventKind::Interaction { interaction } => {
                exploration
                    .apply(interaction)
                    .map_err(|e| format!("event {}: {e}", event.seq))?;
            }
            EventKind::Created { .. } => return Err(format!("event {}: second creation event", event.seq)),
        }
    }
    Ok(Session {
        id: id.to_string(),
        exploration,
        events: stored.events,
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/actions", get(get_actions).post(apply_action))
        .route("/sessions/{id}/narrative", get(get_narrative))
        .route("/sessions/{id}/events", get(get_events))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

/// Replays storage, binds, reports the bound address, and serves until
/// ctrl-c.
pub async fn serve(
    config: Config,
    on_ready: impl FnOnce(SocketAddr),
) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let (state, skipped) = AppState::open(&config.storage, config.heuristic_order)?;
    let state = Arc::new(state);
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    let addr = listener.local_addr()?;
    on_ready(addr);
    tracing::info!(
        %addr,
        sessions = state.session_count().await,
        skipped = skipped.len(),
        "listening"
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    /// The bundle document, as a JSON string or inline object.
    bundle: Value,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    heuristic_order: Option<String>,
}

#[derive(Debug, Serialize)]
struct SessionView<'a> {
    id: &'a str,
    bundle_id: &'a str,
    mode: Mode,
    heuristic_order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    warnings: Option<Vec<Violation>>,
    explanans: &'a Explanans,
    narrative: &'a Narrative,
    actions: Vec<CandidateAction>,
    event_count: usize,
}

impl Session {
    fn view(&self, warnings: Option<Vec<Violation>>) -> SessionView<'_> {
        let x = &self.exploration;
        SessionView {
            id: &self.id,
            bundle_id: &x.bundle().id,
            mode: x.bundle().overview.mode,
            heuristic_order: x.order().to_string(),
            warnings,
            explanans: x.explanans(),
            narrative: x.narrative(),
            actions: x.actions(),
            event_count: self.events.len(),
        }
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(t)| t).map_err(|r| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", r.body_text())
    })
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> Json<Value> {
    let mut ids: Vec<String> = state.sessions.read().await.keys().cloned().collect();
    ids.sort();
    Json(json!({ "sessions": ids }))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let req = body(payload)?;
    let document = match req.bundle {
        Value::String(s) => s,
        other @ Value::Object(_) => other.to_string(),
        _ => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid_request",
                "`bundle` must be a document string or an object",
            ))
        }
    };
    let order = match &req.heuristic_order {
        Some(o) => o
            .parse()
            .map_err(|e: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e))?,
        None => state.order,
    };
    let bundle = parse_bundle(&document).map_err(ApiError::from)?;
    let mut checked = bundle.clone();
    if let Some(m) = req.mode {
        checked.overview.mode = m;
    }
    let warnings = validate_explainability(&checked);
    let exploration = Exploration::start(bundle, req.mode, order).map_err(ApiError::from)?;

    let id = uuid::Uuid::new_v4().to_string();
    let created = Event::now(
        0,
        EventKind::Created {
            mode: req.mode,
            heuristic_order: order.to_string(),
        },
    );
    state
        .store
        .create(&id, &document, &created)
        .map_err(ApiError::from)?;
    let session = Session {
        id: id.clone(),
        exploration,
        events: vec![created],
    };
    let response = (StatusCode::CREATED, Json(serde_json::to_value(session.view(Some(warnings))).expect("view serializes"))).into_response();
    state
        .sessions
        .write()
        .await
        .insert(id, Arc::new(Mutex::new(session)));
    Ok(response)
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id).await?;
    let s = session.lock().await;
    Ok(Json(serde_json::to_value(s.view(None)).expect("view serializes")))
}

async fn get_actions(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Vec<CandidateAction>>, ApiError> {
    let session = state.session(&id).await?;
    let s = session.lock().await;
    Ok(Json(s.exploration.actions()))
}

#[derive(Serialize)]
struct Delta {
    appended: Vec<InfoNode>,
    explanans_len: usize,
    actions: Vec<CandidateAction>,
}

async fn apply_action(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    payload: Result<Json<Interaction>, JsonRejection>,
) -> Result<Json<Delta>, ApiError> {
    let session = state.session(&id).await?;
    let interaction = body(payload)?;
    let mut s = session.lock().await;
    let mut next = s.exploration.clone();
    let appended = next.apply(&interaction).map_err(ApiError::from)?;
    let event = Event::now(s.events.len() as u64, EventKind::Interaction { interaction });
    state.store.append(&id, &event).map_err(ApiError::from)?;
    s.events.push(event);
    s.exploration = next;
    Ok(Json(Delta {
        appended,
        explanans_len: s.exploration.explanans().len(),
        actions: s.exploration.actions(),
    }))
}

#[derive(Deserialize)]
struct NarrativeQuery {
    format: Option<String>,
}

async fn get_narrative(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<NarrativeQuery>,
) -> Result<Response, ApiError> {
    let session = state.session(&id).await?;
    let format: ExportFormat = match q.format.as_deref() {
        None => ExportFormat::Json,
        Some(f) => f
            .parse()
            .map_err(|e: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_format", e))?,
    };
    let s = session.lock().await;
    let text = s.exploration.export(format);
    let content_type = match format {
        ExportFormat::Json => "application/json",
        ExportFormat::Markdown => "text/markdown; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], text).into_response())
}

async fn get_events(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Vec<Event>>, ApiError> {
    let session = state.session(&id).await?;
    let s = session.lock().await;
    Ok(Json(s.events.clone()))
}
