use serde::{Deserialize, Serialize};

use crate::certificate::CertificateMetadata;
use crate::clock::Timestamp;
use crate::ledger::{InstitutionRecord, WalletAddress};
use crate::payment::{Amount, Currency, PaymentOutcome};
use crate::token::TokenId;

/// A state-transition record carried in a block payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transition {
    Genesis {
        network: String,
    },
    InstitutionRegistered {
        record: InstitutionRecord,
    },
    TokenMinted {
        token_id: TokenId,
        creator: WalletAddress,
        metadata: CertificateMetadata,
    },
    TokenTransferred {
        token_id: TokenId,
        from: WalletAddress,
        to: WalletAddress,
    },
    /// The token is held by the escrow contract pending this order.
    EscrowOpened {
        token_id: TokenId,
        order_id: String,
        amount: Amount,
        currency: Currency,
        expiry_seconds: u64,
        created_at: Timestamp,
    },
    /// An oracle delivery accepted by the escrow contract.
    PaymentSettled {
        token_id: TokenId,
        order_id: String,
        delivery_id: String,
        outcome: PaymentOutcome,
        payer_wallet: Option<WalletAddress>,
    },
    CertificateRevoked {
        token_id: TokenId,
        uri: String,
        revoked_at: Timestamp,
    },
}

impl Transition {
    pub fn kind(&self) -> &'static str {
        match self {
            Transition::Genesis { .. } => "genesis",
            Transition::InstitutionRegistered { .. } => "institution_registered",
            Transition::TokenMinted { .. } => "token_minted",
            Transition::TokenTransferred { .. } => "token_transferred",
            Transition::EscrowOpened { .. } => "escrow_opened",
            Transition::PaymentSettled { .. } => "payment_settled",
            Transition::CertificateRevoked { .. } => "certificate_revoked",
        }
    }
}
