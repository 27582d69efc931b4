use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use nftcert_core::wire::ErrorBody;
use nftcert_core::Error;

/// A structured `{code, message}` error with its HTTP status.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
            },
        }
    }
}

fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::InvalidInput(_) | Error::SchemaViolation { .. } | Error::Codec(_) | Error::UnsupportedBackend(_) => {
            StatusCode::BAD_REQUEST
        }
        Error::NotAccredited(_) => StatusCode::FORBIDDEN,
        Error::NotFound { .. } => StatusCode::NOT_FOUND,
        Error::AlreadyRegistered(_)
        | Error::NotOwner { .. }
        | Error::InvalidState(_)
        | Error::Conflict(_)
        | Error::Expired(_) => StatusCode::CONFLICT,
        Error::StoreUnavailable => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = status_of(&e);
        if status.is_server_error() {
            tracing::error!(error = %e, "request failed");
        }
        ApiError {
            status,
            body: ErrorBody {
                code: e.code().into(),
                message: e.to_string(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
