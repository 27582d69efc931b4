//! Async client for the nftcert service. One method per route; request and
//! response bodies are the shared types in `nftcert_core::wire`.

use nftcert_core::wire::{
    CreateOrder, ErrorBody, IssueCertificate, IssuedCertificate, OrderView, PayOrder, RegisterInstitution,
    RevokeRequest, Revoked, Status, StoredImage, VerifyRequest, WalletTokens,
};
use nftcert_core::{Backend, InstitutionRecord, NftToken, TokenId, VerificationReport, WalletAddress};
use reqwest::{Method, RequestBuilder, Response, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service answered with a structured error.
    #[error("{code}: {message} (HTTP {status})")]
    Api { status: u16, code: String, message: String },
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("unexpected response: {0}")]
    Decode(String),
}

impl ClientError {
    /// The service's error code, if the service produced this error.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api { code, .. } => Some(code),
            _ => None,
        }
    }

    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// A fetched certificate image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub bytes: Vec<u8>,
    pub content_type: String,
    pub revoked: bool,
}

#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    base: String,
}

impl Client {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: impl Into<String>) -> Self {
        Client {
            http: reqwest::Client::new(),
            base: base_url.into().trim_end_matches('/').to_string(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn check(response: Response) -> Result<Response> {
        let status = response.status();
        if status.is_success() {
            return Ok(response);
        }
        let text = response.text().await?;
        let body: ErrorBody = serde_json::from_str(&text).unwrap_or(ErrorBody {
            code: status_code_name(status),
            message: text,
        });
        Err(ClientError::Api {
            status: status.as_u16(),
            code: body.code,
            message: body.message,
        })
    }

    async fn send<T: DeserializeOwned>(&self, builder: RequestBuilder) -> Result<T> {
        let response = Self::check(builder.send().await?).await?;
        let text = response.text().await?;
        serde_json::from_str(&text).map_err(|e| ClientError::Decode(format!("{e}: {text}")))
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        self.send(self.request(Method::GET, path)).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        self.send(self.request(Method::POST, path).json(body)).await
    }

    pub async fn status(&self) -> Result<Status> {
        self.get("/status").await
    }

    pub async fn register_institution(&self, req: &RegisterInstitution) -> Result<InstitutionRecord> {
        self.post("/institutions", req).await
    }

    pub async fn institution(&self, wallet: &WalletAddress) -> Result<InstitutionRecord> {
        self.get(&format!("/institutions/{wallet}")).await
    }

    pub async fn issue_certificate(&self, req: &IssueCertificate) -> Result<IssuedCertificate> {
        self.post("/certificates", req).await
    }

    pub async fn create_order(&self, req: &CreateOrder) -> Result<OrderView> {
        self.post("/orders", req).await
    }

    pub async fn order(&self, order_id: &str) -> Result<OrderView> {
        self.get(&format!("/orders/{order_id}")).await
    }

    pub async fn pay(&self, order_id: &str, payer_wallet: WalletAddress) -> Result<OrderView> {
        self.post(&format!("/orders/{order_id}/pay"), &PayOrder { payer_wallet })
            .await
    }

    pub async fn fail(&self, order_id: &str) -> Result<OrderView> {
        self.send(self.request(Method::POST, &format!("/orders/{order_id}/fail")))
            .await
    }

    pub async fn token(&self, id: TokenId) -> Result<NftToken> {
        self.get(&format!("/tokens/{id}")).await
    }

    pub async fn wallet_tokens(&self, wallet: &WalletAddress) -> Result<WalletTokens> {
        self.get(&format!("/wallets/{wallet}/tokens")).await
    }

    pub async fn verify(&self, req: &VerifyRequest) -> Result<VerificationReport> {
        self.post("/verify", req).await
    }

    pub async fn revoke(&self, id: TokenId, notice: Option<String>) -> Result<Revoked> {
        self.post(&format!("/certificates/{id}/revoke"), &RevokeRequest { notice })
            .await
    }

    pub async fn upload_image(&self, bytes: Vec<u8>, content_type: &str, backend: Backend) -> Result<StoredImage> {
        let backend = match backend {
            Backend::Mutable => "mutable",
            Backend::ContentAddressed => "content_addressed",
        };
        let builder = self
            .request(Method::POST, &format!("/certs?backend={backend}"))
            .header(reqwest::header::CONTENT_TYPE, content_type)
            .body(bytes);
        self.send(builder).await
    }

    /// Fetches an image by object id (mutable backend) or hex digest
    /// (content-addressed backend).
    pub async fn image(&self, object: &str) -> Result<Image> {
        let response = Self::check(self.request(Method::GET, &format!("/certs/{object}")).send().await?).await?;
        let header = |name: &str| {
            response
                .headers()
                .get(name)
                .and_then(|v| v.to_str().ok())
                .map(str::to_string)
        };
        let content_type = header("content-type").unwrap_or_default();
        let revoked = header("x-certificate-revoked").as_deref() == Some("true");
        let bytes = response.bytes().await?.to_vec();
        Ok(Image {
            bytes,
            content_type,
            revoked,
        })
    }
}

fn status_code_name(status: StatusCode) -> String {
    status
        .canonical_reason()
        .unwrap_or("error")
        .to_ascii_lowercase()
        .replace(' ', "_")
}
