use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error("no specification named `{0}`")]
    UnknownSpec(String),
    #[error("specification rejected: {0}")]
    InvalidSpec(String),
    #[error("target {0:?} is not a valid target of this specification")]
    InvalidTarget(Vec<i64>),
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("another answer to this session is being processed")]
    Busy,
    #[error("the session has no pending query (status {0})")]
    NoPendingQuery(&'static str),
    #[error("answer is for {answered:?} but the pending query is {pending:?}")]
    StaleQuery {
        answered: Vec<i64>,
        pending: Vec<i64>,
    },
    #[error("`{label}` is not a declared outcome; expected one of {declared:?}")]
    UnknownOutcome {
        label: String,
        declared: Vec<String>,
    },
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::UnknownSpec(_) | ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::Busy | ApiError::NoPendingQuery(_) | ApiError::StaleQuery { .. } => {
                StatusCode::CONFLICT
            }
            ApiError::InvalidSpec(_)
            | ApiError::InvalidTarget(_)
            | ApiError::UnknownOutcome { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Stable machine-readable code for the `error` field.
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::BadRequest(_) => "bad_request",
            ApiError::UnknownSpec(_) => "unknown_spec",
            ApiError::InvalidSpec(_) => "invalid_spec",
            ApiError::InvalidTarget(_) => "invalid_target",
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::Busy => "session_busy",
            ApiError::NoPendingQuery(_) => "no_pending_query",
            ApiError::StaleQuery { .. } => "stale_query",
            ApiError::UnknownOutcome { .. } => "unknown_outcome",
            ApiError::Internal(_) => "internal",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}
