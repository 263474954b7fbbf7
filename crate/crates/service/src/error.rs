use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use sagex_core::es::EsError;
use sagex_core::format::BundleError;
use sagex_core::reasoner::ReasonerError;
use serde_json::{json, Value};

use crate::store::StoreError;

/// Error body `{code, message, detail}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn unknown_session(id: &str) -> Self {
        ApiError {
            detail: json!({ "session": id }),
            ..ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"))
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "detail": self.detail });
        (self.status, Json(body)).into_response()
    }
}

impl From<BundleError> for ApiError {
    fn from(e: BundleError) -> Self {
        let status = match e {
            BundleError::Syntax { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let detail = match e.position() {
            Some((line, column)) => json!({ "line": line, "column": column }),
            None => Value::Null,
        };
        ApiError {
            detail,
            ..ApiError::new(status, e.code(), e.to_string())
        }
    }
}

impl From<ReasonerError> for ApiError {
    fn from(e: ReasonerError) -> Self {
        let detail = match &e {
            ReasonerError::CyclicDependency { cycle } => {
                json!({ "cycle": cycle.iter().map(|l| l.to_string()).collect::<Vec<_>>() })
            }
            ReasonerError::NotPositivelyDerived(l) => json!({ "literal": l.to_string() }),
        };
        ApiError {
            detail,
            ..ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "reasoning_error", e.to_string())
        }
    }
}

impl From<EsError> for ApiError {
    fn from(e: EsError) -> Self {
        let detail = match &e {
            EsError::UnknownTarget(t) | EsError::NothingToExpand(t) => json!({ "target": t }),
            EsError::NotApplicable { target, .. } | EsError::AlreadyShown { target, .. } => {
                json!({ "target": target })
            }
            _ => Value::Null,
        };
        ApiError {
            detail,
            ..ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        tracing::error!(error = %e, "storage failure");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e.to_string())
    }
}
