use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use segdesc_core::io::{AnalysisRequest, ProblemDocument};
use segdesc_core::Error;

use crate::session::{ComparisonEdit, Session, SessionStore};

pub struct ApiError {
    status: StatusCode,
    message: String,
    location: Option<String>,
}

impl ApiError {
    fn not_found(what: &str) -> Self {
        Self { status: StatusCode::NOT_FOUND, message: format!("{what} not found"), location: None }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Inconsistent
            | Error::RelationNotNecessary(..)
            | Error::RelationAlreadyPossible(..)
            | Error::Contradictory
            | Error::OracleTooLarge { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        match e {
            Error::Parse { location, message } => Self { status, message, location: Some(location) },
            other => Self { status, message: other.to_string(), location: None },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.message, "location": self.location });
        (self.status, json_bytes(&body)).into_response()
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Response {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    raw_json(bytes)
}

fn raw_json(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn parse_body<T: DeserializeOwned>(body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body).map_err(|e| ApiError {
        status: StatusCode::BAD_REQUEST,
        message: e.to_string(),
        location: Some(format!("line {} column {}", e.line(), e.column())),
    })
}

fn session(store: &SessionStore, id: &str) -> Result<Arc<Session>, ApiError> {
    store.get(id).ok_or_else(|| ApiError::not_found("session"))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: e.to_string(), location: None })?
        .map_err(ApiError::from)
}

async fn create(State(store): State<Arc<SessionStore>>, body: String) -> Result<Response, ApiError> {
    let document = ProblemDocument::from_json(&body)?;
    let s = blocking(move || store.create(document)).await?;
    let body = serde_json::json!({ "id": s.id, "revision": s.current().number });
    Ok((StatusCode::CREATED, json_bytes(&body)).into_response())
}

async fn show(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(json_bytes(&session(&store, &id)?.summary()?))
}

async fn revise(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: String,
) -> Result<Response, ApiError> {
    let s = session(&store, &id)?;
    let edit: ComparisonEdit = parse_body(&body)?;
    let summary = blocking(move || s.revise(edit)).await?;
    Ok(json_bytes(&summary))
}

async fn analyze(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: String,
) -> Result<Response, ApiError> {
    let s = session(&store, &id)?;
    let request: AnalysisRequest = parse_body(&body)?;
    let (n, bytes) = blocking(move || s.analyze(&request)).await?;
    let location = format!("/sessions/{id}/analyses/{n}");
    Ok((StatusCode::OK, [(header::LOCATION, location)], raw_json(bytes.as_ref().clone())).into_response())
}

async fn fetch(
    State(store): State<Arc<SessionStore>>,
    Path((id, n)): Path<(String, usize)>,
) -> Result<Response, ApiError> {
    let bytes = session(&store, &id)?.analysis(n).ok_or_else(|| ApiError::not_found("analysis"))?;
    Ok(raw_json(bytes.as_ref().clone()))
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/comparisons", post(revise))
        .route("/sessions/{id}/analyses", post(analyze))
        .route("/sessions/{id}/analyses/{n}", get(fetch))
        .with_state(store)
}
