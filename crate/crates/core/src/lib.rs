//! NFT-based academic certificates on a permissioned hash-chained ledger.
//!
//! Accredited institutions mint certificate tokens into escrow at the zero
//! address; a simulated fiat payment gateway reports outcomes through an
//! oracle, and the escrow releases each token to the paying student's
//! wallet. Verifiers recompute a SHA-256 identity binding from resume data
//! and compare it with the on-chain metadata.

pub mod certificate;
pub mod clock;
pub mod config;
pub mod error;
pub mod escrow;
mod journal;
pub mod ledger;
pub mod payment;
pub mod state;
pub mod storage;
pub mod system;
pub mod token;
pub mod transition;
pub mod verify;
pub mod wire;

pub use certificate::{CertificateFields, CertificateMetadata, HashSignature, PersonalInfo};
pub use clock::{Clock, FixedClock, SystemClock, Timestamp};
pub use config::{ApiConfig, ClockMode};
pub use error::{Error, Result};
pub use escrow::{EscrowRecord, EscrowState};
pub use ledger::{InstitutionRecord, KeyPair, Ledger, LedgerBlock, ValidationReport, WalletAddress};
pub use payment::{Amount, Currency, OracleMessage, OrderStatus, OrderTerms, PaymentOrder, PaymentOutcome};
pub use state::ChainState;
pub use storage::{Backend, StoredObject};
pub use system::CertSystem;
pub use token::{NftToken, TokenId, TransferRecord};
pub use verify::{CheckOutcome, Verdict, VerificationReport};
