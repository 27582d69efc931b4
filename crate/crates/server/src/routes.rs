use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use nftcert_core::storage::CAS_SCHEME;
use nftcert_core::wire::{
    CreateOrder, IssueCertificate, IssuedCertificate, OrderView, PayOrder, RegisterInstitution, RevokeRequest,
    Revoked, Status, StoredImage, VerifyRequest, WalletTokens,
};
use nftcert_core::{
    Backend, CertSystem, InstitutionRecord, NftToken, PaymentOrder, TokenId, VerificationReport, WalletAddress,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::{ApiError, AppState};

type ApiResult<T> = Result<T, ApiError>;

/// `Json` whose rejections use the service's `{code, message}` error shape.
struct Body<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(value)) => Ok(Body(value)),
            Err(JsonRejection::JsonDataError(e)) => Err(ApiError::bad_request("schema_violation", e.body_text())),
            Err(e) => Err(ApiError::bad_request("invalid_request", e.body_text())),
        }
    }
}

fn wallet_param(raw: &str) -> ApiResult<WalletAddress> {
    raw.parse()
        .map_err(|e: nftcert_core::Error| ApiError::bad_request("invalid_input", e.to_string()))
}

fn token_param(raw: &str) -> ApiResult<TokenId> {
    raw.parse::<u64>()
        .map(TokenId)
        .map_err(|_| ApiError::bad_request("invalid_input", format!("`{raw}` is not a token id")))
}

fn order_view(system: &CertSystem, order: PaymentOrder) -> OrderView {
    let escrow_state = system
        .escrow_of(order.token_id)
        .filter(|r| r.order_id == order.order_id)
        .map(|r| r.state);
    OrderView { order, escrow_state }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/status", get(status))
        .route("/institutions", post(register_institution))
        .route("/institutions/{wallet}", get(get_institution))
        .route("/certificates", post(issue_certificate))
        .route("/certificates/{token_id}/revoke", post(revoke))
        .route("/orders", post(create_order))
        .route("/orders/{id}", get(get_order))
        .route("/orders/{id}/pay", post(pay_order))
        .route("/orders/{id}/fail", post(fail_order))
        .route("/tokens/{id}", get(get_token))
        .route("/wallets/{addr}/tokens", get(wallet_tokens))
        .route("/verify", post(verify))
        .route("/certs", post(upload_image))
        .route("/certs/{object}", get(get_image))
        .with_state(state)
}

async fn status(State(state): State<AppState>) -> Json<Status> {
    let system = state.system().read();
    Json(Status {
        blocks: system.ledger().len() as u64,
        head_hash: system.ledger().head().block_hash.to_string(),
        state_digest: system.state_digest().iter().map(|b| format!("{b:02x}")).collect(),
        now: system.now(),
    })
}

async fn register_institution(
    State(state): State<AppState>,
    Body(req): Body<RegisterInstitution>,
) -> ApiResult<(StatusCode, Json<InstitutionRecord>)> {
    let mut system = state.system().write();
    system.register_institution(&req.name, req.wallet, &req.published_uri)?;
    let record = system.lookup_institution(&req.wallet).cloned().expect("just registered");
    Ok((StatusCode::CREATED, Json(record)))
}

async fn get_institution(
    State(state): State<AppState>,
    Path(wallet): Path<String>,
) -> ApiResult<Json<InstitutionRecord>> {
    let wallet = wallet_param(&wallet)?;
    let system = state.system().read();
    system
        .lookup_institution(&wallet)
        .cloned()
        .map(Json)
        .ok_or_else(|| nftcert_core::Error::not_found("institution", wallet).into())
}

async fn issue_certificate(
    State(state): State<AppState>,
    Body(req): Body<IssueCertificate>,
) -> ApiResult<(StatusCode, Json<IssuedCertificate>)> {
    let fields = req.fields();
    let IssueCertificate {
        creator,
        personal_info,
        terms,
        ..
    } = req;
    let mut system = state.system().write();
    let (token_id, order) = system.issue_certificate(creator, &personal_info, fields, terms.into())?;
    Ok((StatusCode::CREATED, Json(IssuedCertificate { token_id, order })))
}

async fn create_order(
    State(state): State<AppState>,
    Body(req): Body<CreateOrder>,
) -> ApiResult<(StatusCode, Json<OrderView>)> {
    let mut system = state.system().write();
    let result = system.create_order(req.token_id, req.terms.into());
    // Creating an order can expire a lapsed one; relay that outcome too.
    system.oracle_drain()?;
    let order = result?;
    Ok((StatusCode::CREATED, Json(order_view(&system, order))))
}

async fn get_order(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<OrderView>> {
    let system = state.system().read();
    let order = system.order(&id)?.clone();
    Ok(Json(order_view(&system, order)))
}

async fn pay_order(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<PayOrder>,
) -> ApiResult<Json<OrderView>> {
    let mut system = state.system().write();
    let result = system.complete_payment(&id, req.payer_wallet);
    // An expired order still produced an oracle message; deliver it either way.
    system.oracle_drain()?;
    result?;
    let order = system.order(&id)?.clone();
    Ok(Json(order_view(&system, order)))
}

async fn fail_order(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<OrderView>> {
    let mut system = state.system().write();
    let result = system.fail_order(&id);
    system.oracle_drain()?;
    result?;
    let order = system.order(&id)?.clone();
    Ok(Json(order_view(&system, order)))
}

async fn get_token(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<NftToken>> {
    let id = token_param(&id)?;
    let system = state.system().read();
    Ok(Json(system.token(id)?.clone()))
}

async fn wallet_tokens(State(state): State<AppState>, Path(addr): Path<String>) -> ApiResult<Json<WalletTokens>> {
    let wallet = wallet_param(&addr)?;
    let system = state.system().read();
    Ok(Json(WalletTokens {
        wallet,
        tokens: system.tokens_of_wallet(&wallet),
    }))
}

async fn verify(
    State(state): State<AppState>,
    Body(req): Body<VerifyRequest>,
) -> ApiResult<Json<VerificationReport>> {
    let system = state.system().read();
    Ok(Json(system.full_verification(
        &req.personal_info,
        req.token_id,
        &req.claimed_wallet,
    )?))
}

async fn revoke(
    State(state): State<AppState>,
    Path(token_id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Revoked>> {
    let token_id = token_param(&token_id)?;
    // The body is optional; when present it must be a valid revoke request.
    let request: RevokeRequest = if body.iter().all(u8::is_ascii_whitespace) {
        RevokeRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("schema_violation", e.to_string()))?
    };
    let notice = request
        .notice
        .unwrap_or_else(|| format!("CERTIFICATE REVOKED\ntoken {token_id}\n"));
    let mut system = state.system().write();
    system.revoke_certificate(token_id, notice.as_bytes())?;
    let uri = system.token(token_id)?.metadata.certificate_uri.clone();
    Ok(Json(Revoked {
        token_id,
        uri,
        revoked: true,
    }))
}

#[derive(Deserialize)]
struct UploadQuery {
    #[serde(default = "default_backend")]
    backend: Backend,
}

fn default_backend() -> Backend {
    Backend::Mutable
}

async fn upload_image(
    State(state): State<AppState>,
    query: Result<Query<UploadQuery>, axum::extract::rejection::QueryRejection>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<(StatusCode, Json<StoredImage>)> {
    let Query(query) = query.map_err(|e| ApiError::bad_request("invalid_input", e.body_text()))?;
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("application/octet-stream");
    let mut system = state.system().write();
    let uri = system.put_image(&bytes, content_type, query.backend)?;
    Ok((
        StatusCode::CREATED,
        Json(StoredImage {
            uri,
            backend: query.backend,
        }),
    ))
}

/// Serves a stored image. Mutable objects are addressed by their object id,
/// content-addressed ones by their hex digest.
async fn get_image(State(state): State<AppState>, Path(object): Path<String>) -> ApiResult<Response> {
    let system = state.system().read();
    let stored = if object.len() == 64 && object.bytes().all(|b| b.is_ascii_hexdigit()) {
        system.get_by_uri(&format!("{CAS_SCHEME}{}", object.to_ascii_lowercase()))?
    } else {
        system.storage().get_object(&object)?
    };
    let content_type =
        HeaderValue::from_str(&stored.content_type).unwrap_or(HeaderValue::from_static("application/octet-stream"));
    let mut response = (StatusCode::OK, stored.bytes).into_response();
    response.headers_mut().insert(header::CONTENT_TYPE, content_type);
    if stored.revoked {
        response
            .headers_mut()
            .insert("x-certificate-revoked", HeaderValue::from_static("true"));
    }
    Ok(response)
}
