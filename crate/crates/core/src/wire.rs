//! JSON bodies exchanged by the HTTP service and its clients.

use serde::{Deserialize, Serialize};

use crate::certificate::{CertificateFields, PersonalInfo};
use crate::escrow::EscrowState;
use crate::ledger::WalletAddress;
use crate::payment::{Amount, Currency, OrderTerms, PaymentOrder};
use crate::storage::Backend;
use crate::token::TokenId;

/// Order lifetime used when a request does not name one.
pub const DEFAULT_EXPIRY_SECONDS: u64 = 86_400;

fn default_expiry() -> u64 {
    DEFAULT_EXPIRY_SECONDS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterInstitution {
    pub name: String,
    pub wallet: WalletAddress,
    pub published_uri: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeeTerms {
    pub amount: Amount,
    pub currency: Currency,
    #[serde(default = "default_expiry")]
    pub expiry_seconds: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub payer_hint: String,
}

impl FeeTerms {
    pub fn new(amount: Amount, currency: Currency) -> Self {
        FeeTerms {
            amount,
            currency,
            expiry_seconds: DEFAULT_EXPIRY_SECONDS,
            payer_hint: String::new(),
        }
    }
}

impl From<FeeTerms> for OrderTerms {
    fn from(t: FeeTerms) -> Self {
        OrderTerms::new(t.amount, t.currency, t.expiry_seconds).with_payer_hint(t.payer_hint)
    }
}

/// Begin-mint request. The personal fields are only hashed, never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueCertificate {
    pub creator: WalletAddress,
    pub personal_info: PersonalInfo,
    pub institution_name: String,
    pub degree_title: String,
    pub degree_conferral_date: String,
    pub certificate_uri: String,
    #[serde(flatten)]
    pub terms: FeeTerms,
}

impl IssueCertificate {
    pub fn fields(&self) -> CertificateFields {
        CertificateFields::new(
            self.institution_name.clone(),
            self.degree_title.clone(),
            self.degree_conferral_date.clone(),
            self.certificate_uri.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuedCertificate {
    pub token_id: TokenId,
    pub order: PaymentOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateOrder {
    pub token_id: TokenId,
    #[serde(flatten)]
    pub terms: FeeTerms,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayOrder {
    pub payer_wallet: WalletAddress,
}

/// An order together with the escrow it funds, after the oracle has relayed
/// any outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderView {
    #[serde(flatten)]
    pub order: PaymentOrder,
    pub escrow_state: Option<EscrowState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalletTokens {
    pub wallet: WalletAddress,
    pub tokens: Vec<TokenId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRequest {
    pub token_id: TokenId,
    pub claimed_wallet: WalletAddress,
    pub personal_info: PersonalInfo,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevokeRequest {
    /// Replacement image contents; a plain text notice is generated if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revoked {
    pub token_id: TokenId,
    pub uri: String,
    pub revoked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredImage {
    pub uri: String,
    pub backend: Backend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Status {
    pub blocks: u64,
    pub head_hash: String,
    pub state_digest: String,
    pub now: i64,
}
