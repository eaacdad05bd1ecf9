use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use citykpi_core::KpiError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Kpi(#[from] KpiError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// An HTTP error rendered as `{"error": {"code", "message"}}`.
#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unprocessable", message)
    }

    pub fn no_dataset() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "no_dataset", "no dataset is loaded")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<KpiError> for ApiError {
    fn from(e: KpiError) -> Self {
        let message = e.to_string();
        match e {
            KpiError::UnknownColumn(_) => Self::not_found(message),
            KpiError::BadHyperparameter(_) | KpiError::BadFraction(_) | KpiError::InvalidArgument(_) => {
                Self::bad_request(message)
            }
            KpiError::Io(_) | KpiError::Json(_) => Self::internal(message),
            _ => Self::unprocessable(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}
