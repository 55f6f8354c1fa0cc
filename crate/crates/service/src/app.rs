//! Router, shared state and request handlers.
//!
//! All mutation goes through one async mutex around the controller, so the
//! decision log is a linearisation of the accepted requests. Readers of
//! `/v1/state` never take that lock: they get the snapshot published after
//! the last mutation.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::Router;
use de_core::analysis::WcpuReading;
use de_core::controller::{ControllerError, ControllerState, DecisionDoc, RequestDoc};
use de_core::model::{FailureSetSpec, Topology, TrafficMatrix};
use serde::Serialize;
use thiserror::Error;
use tokio::sync::Mutex;

use crate::api::{
    parse_request, ApiError, ApiPlacementResponse, ErrorBody, RollbackResponse, StateSnapshot,
    API_VERSION,
};
use crate::decision_log::{DecisionLog, LogError, LogRecord};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("state is already loaded")]
    AlreadyLoaded,
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("decision log record {index}: {source}")]
    ReplayRejected {
        index: usize,
        #[source]
        source: ControllerError,
    },
    #[error("decision log record {index}: replayed decision for `{request_id}` differs from the logged one")]
    ReplayDiverged { index: usize, request_id: String },
}

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    pub strict_json: bool,
    pub lock_timeout: Duration,
    pub wcpu_reading: WcpuReading,
    pub state_spec: FailureSetSpec,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            strict_json: true,
            lock_timeout: Duration::from_secs(5),
            wcpu_reading: WcpuReading::Union,
            state_spec: FailureSetSpec::all(),
        }
    }
}

struct Stored {
    request: RequestDoc,
    body: Bytes,
}

struct Loaded {
    controller: ControllerState,
    /// Responses by request id, for idempotent replay.
    responses: HashMap<String, Stored>,
    log: Option<DecisionLog>,
}

impl Loaded {
    fn snapshot(&mut self, spec: FailureSetSpec) -> StateSnapshot {
        let topo = Arc::clone(self.controller.topology());
        StateSnapshot {
            api_version: API_VERSION,
            nodes: topo.node_count(),
            circuits: topo.circuit_count(),
            committed_demands: self.controller.committed_matrix().len(),
            decisions: self.controller.log().len(),
            failure_sets: spec.to_string(),
            network_wc_util: self
                .controller
                .network_wc_util(spec)
                .expect("scenario set always contains the no-failure case"),
        }
    }

    fn log(&mut self, record: &LogRecord) -> Result<(), LogError> {
        match self.log.as_mut() {
            Some(log) => log.append(record),
            None => Ok(()),
        }
    }
}

struct Inner {
    options: ServiceOptions,
    core: Mutex<Option<Loaded>>,
    snapshot: RwLock<Option<Arc<StateSnapshot>>>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// A service that answers 503 until [`load`](Self::load) succeeds.
    pub fn new(options: ServiceOptions) -> Self {
        AppState {
            inner: Arc::new(Inner {
                options,
                core: Mutex::new(None),
                snapshot: RwLock::new(None),
            }),
        }
    }

    /// Installs the topology and seed matrix, replaying `log` on top.
    pub async fn load(
        &self,
        topology: Arc<Topology>,
        seed: TrafficMatrix,
        log: Option<(DecisionLog, Vec<LogRecord>)>,
    ) -> Result<(), ServiceError> {
        let mut core = self.inner.core.lock().await;
        if core.is_some() {
            return Err(ServiceError::AlreadyLoaded);
        }
        let controller =
            ControllerState::new(topology, seed).with_reading(self.inner.options.wcpu_reading);
        let mut loaded = Loaded {
            controller,
            responses: HashMap::new(),
            log: None,
        };
        if let Some((log, records)) = log {
            replay(&mut loaded, &records)?;
            tracing::info!(records = records.len(), path = %log.path().display(), "replayed decision log");
            loaded.log = Some(log);
        }
        self.publish(&mut loaded);
        *core = Some(loaded);
        Ok(())
    }

    /// Committed matrix, for inspection and tests.
    pub async fn committed_matrix(&self) -> Option<TrafficMatrix> {
        let core = self.inner.core.lock().await;
        core.as_ref()
            .map(|l| l.controller.committed_matrix().clone())
    }

    pub fn snapshot(&self) -> Option<Arc<StateSnapshot>> {
        self.inner.snapshot.read().expect("snapshot lock").clone()
    }

    fn publish(&self, loaded: &mut Loaded) {
        let snap = Arc::new(loaded.snapshot(self.inner.options.state_spec));
        *self.inner.snapshot.write().expect("snapshot lock") = Some(snap);
    }
}

fn replay(loaded: &mut Loaded, records: &[LogRecord]) -> Result<(), ServiceError> {
    for (index, record) in records.iter().enumerate() {
        let rejected = |source| ServiceError::ReplayRejected { index, source };
        match record {
            LogRecord::Place { request, response } => {
                let topo = Arc::clone(loaded.controller.topology());
                let req = request.resolve(&topo).map_err(rejected)?;
                let decision = loaded.controller.place(&req).map_err(rejected)?;
                let replayed = ApiPlacementResponse {
                    api_version: API_VERSION,
                    decision: DecisionDoc::new(&topo, &decision),
                };
                if &replayed != response {
                    return Err(ServiceError::ReplayDiverged {
                        index,
                        request_id: request.request_id.clone(),
                    });
                }
                loaded.responses.insert(
                    request.request_id.clone(),
                    Stored {
                        request: request.clone(),
                        body: Bytes::from(serde_json::to_vec(&replayed).expect("serialisable")),
                    },
                );
            }
            LogRecord::Rollback { request_id } => {
                loaded.controller.rollback(request_id).map_err(rejected)?;
                loaded.responses.remove(request_id);
            }
        }
    }
    Ok(())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/placements", post(post_placement))
        .route("/v1/placements/{request_id}", delete(delete_placement))
        .route("/v1/state", get(get_state))
        .with_state(state)
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("serialisable");
    raw_json(status, Bytes::from(bytes))
}

fn raw_json(status: StatusCode, body: Bytes) -> Response {
    (
        status,
        [(
            header::CONTENT_TYPE,
            HeaderValue::from_static("application/json"),
        )],
        body,
    )
        .into_response()
}

fn error(status: StatusCode, err: ApiError) -> Response {
    json_response(status, &ErrorBody { error: err })
}

fn unavailable(message: &str) -> Response {
    let mut resp = error(
        StatusCode::SERVICE_UNAVAILABLE,
        ApiError::new("unavailable", message),
    );
    resp.headers_mut()
        .insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
    resp
}

fn internal(message: impl Into<String>) -> Response {
    error(
        StatusCode::INTERNAL_SERVER_ERROR,
        ApiError::new("internal", message),
    )
}

fn controller_error(e: ControllerError) -> Response {
    match e {
        ControllerError::UnknownNode { field, name } => error(
            StatusCode::BAD_REQUEST,
            ApiError::new("unknown_node", format!("unknown node `{name}`")).at(field),
        ),
        ControllerError::InvalidRequest { field, message } => error(
            StatusCode::BAD_REQUEST,
            ApiError::new("invalid_field", message).at(field),
        ),
        ControllerError::DuplicateRequest(id) => error(
            StatusCode::CONFLICT,
            ApiError::new("conflict", format!("request `{id}` already committed")).at("request_id"),
        ),
        ControllerError::UnknownDecision(id) => error(
            StatusCode::NOT_FOUND,
            ApiError::new("not_found", format!("no placement `{id}`")),
        ),
        e @ (ControllerError::NotCommitted(_) | ControllerError::NotMostRecent(_)) => error(
            StatusCode::CONFLICT,
            ApiError::new("conflict", e.to_string()),
        ),
        ControllerError::Analysis(e) => internal(e.to_string()),
    }
}

macro_rules! lock_or_503 {
    ($state:expr) => {
        match tokio::time::timeout($state.inner.options.lock_timeout, $state.inner.core.lock())
            .await
        {
            Ok(guard) => guard,
            Err(_) => return unavailable("controller busy, retry later"),
        }
    };
}

async fn post_placement(State(state): State<AppState>, body: Bytes) -> Response {
    let parsed = match parse_request(&body, state.inner.options.strict_json) {
        Ok(p) => p,
        Err(e) => return error(StatusCode::BAD_REQUEST, e),
    };
    let warning = (!parsed.ignored.is_empty()).then(|| {
        tracing::warn!(fields = ?parsed.ignored, "ignoring unknown request fields");
        let text = format!(
            "299 de-service \"ignored unknown fields: {}\"",
            parsed.ignored.join(", ")
        );
        HeaderValue::from_str(&text).unwrap_or_else(|_| {
            HeaderValue::from_static("299 de-service \"ignored unknown fields\"")
        })
    });
    let doc = parsed.doc;

    let mut guard = lock_or_503!(state);
    let Some(loaded) = guard.as_mut() else {
        return unavailable("state not loaded");
    };

    let mut resp = if let Some(prev) = loaded.responses.get(&doc.request_id) {
        if prev.request != doc {
            return error(
                StatusCode::CONFLICT,
                ApiError::new("conflict", "request_id reused with a different body")
                    .at("request_id"),
            );
        }
        raw_json(StatusCode::OK, prev.body.clone())
    } else {
        match place(&state, loaded, doc) {
            Ok(r) => r,
            Err(r) => return r,
        }
    };
    if let Some(w) = warning {
        resp.headers_mut().insert(header::WARNING, w);
    }
    resp
}

#[allow(clippy::result_large_err)] // both arms are finished responses
fn place(state: &AppState, loaded: &mut Loaded, doc: RequestDoc) -> Result<Response, Response> {
    let topo = Arc::clone(loaded.controller.topology());
    let request = doc.resolve(&topo).map_err(controller_error)?;
    let decision = loaded
        .controller
        .place(&request)
        .map_err(controller_error)?;
    let response = ApiPlacementResponse {
        api_version: API_VERSION,
        decision: DecisionDoc::new(&topo, &decision),
    };
    let record = LogRecord::Place {
        request: doc.clone(),
        response: response.clone(),
    };
    if let Err(e) = loaded.log(&record) {
        tracing::error!(error = %e, "decision log append failed");
        if decision.committed {
            loaded
                .controller
                .rollback(&doc.request_id)
                .expect("just-committed placement is the most recent");
        }
        return Err(internal(format!("decision log: {e}")));
    }
    let body = Bytes::from(serde_json::to_vec(&response).expect("serialisable"));
    loaded.responses.insert(
        doc.request_id.clone(),
        Stored {
            request: doc,
            body: body.clone(),
        },
    );
    state.publish(loaded);
    Ok(raw_json(StatusCode::OK, body))
}

async fn delete_placement(
    State(state): State<AppState>,
    Path(request_id): Path<String>,
) -> Response {
    let mut guard = lock_or_503!(state);
    let Some(loaded) = guard.as_mut() else {
        return unavailable("state not loaded");
    };
    if let Err(e) = loaded.controller.check_rollback(&request_id) {
        return controller_error(e);
    }
    if let Err(e) = loaded.log(&LogRecord::Rollback {
        request_id: request_id.clone(),
    }) {
        return internal(format!("decision log: {e}"));
    }
    loaded
        .controller
        .rollback(&request_id)
        .expect("checked above");
    loaded.responses.remove(&request_id);
    state.publish(loaded);
    json_response(
        StatusCode::OK,
        &RollbackResponse {
            api_version: API_VERSION,
            request_id,
            rolled_back: true,
            committed_demands: loaded.controller.committed_matrix().len(),
        },
    )
}

async fn get_state(State(state): State<AppState>) -> Response {
    match state.snapshot() {
        Some(snap) => json_response(StatusCode::OK, &*snap),
        None => unavailable("state not loaded"),
    }
}
