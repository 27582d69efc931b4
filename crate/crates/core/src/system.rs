//! `CertSystem`: the single writer over the ledger, the simulated gateway,
//! the image store, and the published-wallet directory.
//!
//! Every mutation validates against current state, commits one block, then
//! folds the block into `ChainState`. Off-chain effects (gateway orders,
//! oracle outbox, published wallets, image manifest) are journaled beside
//! the chain file in `data_dir`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certificate::{build_metadata, ensure_valid_metadata, CertificateFields, CertificateMetadata, PersonalInfo};
use crate::clock::{Clock, Timestamp};
use crate::error::{Error, Result};
use crate::escrow::{EscrowRecord, EscrowState};
use crate::journal::Journal;
use crate::ledger::{InstitutionRecord, Ledger, LedgerBlock, PublishedDirectory, ValidationReport, WalletAddress};
use crate::payment::{Gateway, GatewayEvent, OracleMessage, OrderStatus, OrderTerms, PaymentOrder};
use crate::state::ChainState;
use crate::storage::{Backend, Storage, StoredObject};
use crate::token::{NftToken, TokenId, TransferRecord};
use crate::transition::Transition;
use crate::verify::{self, VerificationInputs, VerificationReport};

pub const CHAIN_FILE: &str = "chain.bin";
pub const GATEWAY_FILE: &str = "gateway.jsonl";
pub const PUBLISHED_FILE: &str = "published.jsonl";
pub const IMAGES_DIR: &str = "images";

#[cfg(feature = "fault-injection")]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultPoint {
    /// Inside `begin_mint`, after the mint is staged and before the order is.
    BetweenMintAndOrder,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Publication {
    uri: String,
    wallet: WalletAddress,
}

#[derive(Debug, Default)]
struct Journals {
    gateway: Option<Journal>,
    published: Option<Journal>,
}

#[derive(Debug)]
pub struct CertSystem {
    ledger: Ledger,
    state: ChainState,
    gateway: Gateway,
    storage: Storage,
    published: PublishedDirectory,
    journals: Journals,
    clock: Arc<dyn Clock>,
    data_dir: Option<PathBuf>,
    #[cfg(feature = "fault-injection")]
    fault: Option<FaultPoint>,
}

impl CertSystem {
    pub fn in_memory(clock: Arc<dyn Clock>, public_base_url: &str) -> Self {
        CertSystem {
            ledger: Ledger::in_memory(),
            state: ChainState::default(),
            gateway: Gateway::default(),
            storage: Storage::in_memory(public_base_url),
            published: PublishedDirectory::default(),
            journals: Journals::default(),
            clock,
            data_dir: None,
            #[cfg(feature = "fault-injection")]
            fault: None,
        }
    }

    /// Opens (or initializes) the store in `data_dir`, replaying the chain
    /// file to rebuild state.
    pub fn open(data_dir: &Path, clock: Arc<dyn Clock>, public_base_url: &str) -> Result<Self> {
        std::fs::create_dir_all(data_dir).map_err(|e| Error::io(data_dir, e))?;
        let ledger = Ledger::open(&data_dir.join(CHAIN_FILE))?;
        let state = ChainState::replay(ledger.blocks())?;
        let (gateway_journal, events) = Journal::open::<GatewayEvent>(&data_dir.join(GATEWAY_FILE))?;
        let (published_journal, publications) = Journal::open::<Publication>(&data_dir.join(PUBLISHED_FILE))?;
        let storage = Storage::open(&data_dir.join(IMAGES_DIR), public_base_url)?;

        let mut published = PublishedDirectory::default();
        for p in publications {
            published.publish(p.uri, p.wallet);
        }
        let mut system = CertSystem {
            ledger,
            state,
            gateway: Gateway::replay(events),
            storage,
            published,
            journals: Journals {
                gateway: Some(gateway_journal),
                published: Some(published_journal),
            },
            clock,
            data_dir: Some(data_dir.to_path_buf()),
            #[cfg(feature = "fault-injection")]
            fault: None,
        };
        system.restore_missing_orders()?;
        Ok(system)
    }

    /// Re-creates gateway orders for escrows committed on-chain whose
    /// journal write never landed.
    fn restore_missing_orders(&mut self) -> Result<()> {
        let mut events = Vec::new();
        for block in self.ledger.blocks() {
            for t in &block.payload {
                if let Transition::EscrowOpened {
                    token_id,
                    order_id,
                    amount,
                    currency,
                    expiry_seconds,
                    created_at,
                } = t
                {
                    if self.gateway.contains(order_id) {
                        continue;
                    }
                    let order = PaymentOrder {
                        order_id: order_id.clone(),
                        token_id: *token_id,
                        payer_hint: String::new(),
                        amount: *amount,
                        currency: *currency,
                        status: OrderStatus::Pending,
                        created_at: *created_at,
                        resolved_at: None,
                        expiry_seconds: *expiry_seconds,
                    };
                    events.push(self.gateway.insert(order));
                }
            }
        }
        self.journal_gateway(&events)
    }

    #[cfg(feature = "fault-injection")]
    pub fn inject_fault(&mut self, fault: Option<FaultPoint>) {
        self.fault = fault;
    }

    #[cfg(feature = "fault-injection")]
    fn check_fault(&self, point: FaultPoint) -> Result<()> {
        if self.fault == Some(point) {
            return Err(Error::InjectedFault(point));
        }
        Ok(())
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn storage_mut(&mut self) -> &mut Storage {
        &mut self.storage
    }

    pub fn published(&self) -> &PublishedDirectory {
        &self.published
    }

    pub fn state_digest(&self) -> [u8; 32] {
        self.state.digest()
    }

    fn commit(&mut self, payload: Vec<Transition>) -> Result<&LedgerBlock> {
        let now = self.clock.now();
        let index = self.ledger.append_block(payload, now)?.index;
        let block = &self.ledger.blocks()[index as usize];
        for t in &block.payload {
            self.state.apply(t, index).map_err(|e| {
                Error::IntegrityViolation(format!("committed block {index} failed to apply: {e}"))
            })?;
        }
        Ok(block)
    }

    fn journal_gateway(&mut self, events: &[GatewayEvent]) -> Result<()> {
        match self.journals.gateway.as_mut() {
            Some(j) => j.append(events),
            None => Ok(()),
        }
    }

    // ----- ledger & registry -----

    pub fn validate_chain(&self) -> ValidationReport {
        self.ledger.validate_chain()
    }

    pub fn register_institution(
        &mut self,
        name: &str,
        wallet: WalletAddress,
        published_uri: &str,
    ) -> Result<InstitutionRecord> {
        let record = InstitutionRecord {
            name: name.to_string(),
            wallet,
            registered_at: self.clock.now(),
            published_uri: published_uri.to_string(),
        };
        self.state.registry.check_register(&record)?;
        self.commit(vec![Transition::InstitutionRegistered {
            record: record.clone(),
        }])?;
        self.publish_wallet(published_uri, wallet)?;
        Ok(record)
    }

    /// Updates what an institution's official channel announces. Off-chain.
    pub fn publish_wallet(&mut self, uri: &str, wallet: WalletAddress) -> Result<()> {
        if let Some(j) = self.journals.published.as_mut() {
            j.append(&[Publication {
                uri: uri.to_string(),
                wallet,
            }])?;
        }
        self.published.publish(uri, wallet);
        Ok(())
    }

    pub fn is_accredited(&self, wallet: &WalletAddress) -> bool {
        self.state.registry.is_accredited(wallet)
    }

    pub fn lookup_institution(&self, wallet: &WalletAddress) -> Option<&InstitutionRecord> {
        self.state.registry.lookup(wallet)
    }

    // ----- tokens -----

    fn stage_mint(&self, creator: WalletAddress, metadata: CertificateMetadata) -> Result<(TokenId, Transition)> {
        if !self.is_accredited(&creator) {
            return Err(Error::NotAccredited(creator.to_string()));
        }
        ensure_valid_metadata(&metadata)?;
        let token_id = self.state.tokens.next_id();
        Ok((
            token_id,
            Transition::TokenMinted {
                token_id,
                creator,
                metadata,
            },
        ))
    }

    /// Mints straight to the zero address without opening an escrow.
    pub fn mint(&mut self, creator: WalletAddress, metadata: CertificateMetadata) -> Result<TokenId> {
        let (token_id, t) = self.stage_mint(creator, metadata)?;
        self.commit(vec![t])?;
        Ok(token_id)
    }

    /// Moves a token between wallets. Tokens under an unreleased escrow can
    /// only leave the zero address through a payment.
    pub fn transfer(&mut self, id: TokenId, from: WalletAddress, to: WalletAddress) -> Result<NftToken> {
        self.state.tokens.check_transfer(id, &from)?;
        if to.is_zero() {
            return Err(Error::InvalidInput("cannot transfer to the zero address".into()));
        }
        if let Some(record) = self.state.escrow.get(id) {
            if record.state != EscrowState::Released {
                return Err(Error::InvalidState(format!("token {id} is held in escrow")));
            }
        }
        self.commit(vec![Transition::TokenTransferred { token_id: id, from, to }])?;
        self.token(id).cloned()
    }

    pub fn token(&self, id: TokenId) -> Result<&NftToken> {
        self.state.tokens.get(id)
    }

    pub fn owner_of(&self, id: TokenId) -> Result<WalletAddress> {
        self.state.tokens.owner_of(id)
    }

    pub fn creator_of(&self, id: TokenId) -> Result<WalletAddress> {
        self.state.tokens.creator_of(id)
    }

    pub fn token_history(&self, id: TokenId) -> Result<&[TransferRecord]> {
        self.state.tokens.history(id)
    }

    pub fn tokens_of_wallet(&self, wallet: &WalletAddress) -> Vec<TokenId> {
        self.state.tokens.tokens_of_wallet(wallet)
    }

    // ----- payment gateway & oracle -----

    /// Expires a lapsed pending order for `token_id`, if any, so a new one
    /// can be opened.
    fn expire_lapsed_for(&mut self, token_id: TokenId, now: Timestamp) -> Result<()> {
        let lapsed = self
            .gateway
            .pending_for_token(token_id)
            .filter(|o| o.is_due(now))
            .map(|o| o.order_id.clone());
        if let Some(order_id) = lapsed {
            let (_, events) = self.gateway.expire(&order_id, now)?;
            self.journal_gateway(&events)?;
        }
        Ok(())
    }

    fn stage_order(&self, token_id: TokenId, terms: &OrderTerms, now: Timestamp) -> Result<(PaymentOrder, Transition)> {
        let order = self.gateway.prepare_order(token_id, terms, now)?;
        let t = Transition::EscrowOpened {
            token_id,
            order_id: order.order_id.clone(),
            amount: order.amount,
            currency: order.currency,
            expiry_seconds: order.expiry_seconds,
            created_at: order.created_at,
        };
        Ok((order, t))
    }

    fn record_order(&mut self, order: PaymentOrder) -> Result<PaymentOrder> {
        let event = self.gateway.insert(order.clone());
        self.journal_gateway(&[event])?;
        Ok(order)
    }

    /// Opens a new payment order for a token held at the zero address.
    pub fn create_order(&mut self, token_id: TokenId, terms: OrderTerms) -> Result<PaymentOrder> {
        let now = self.clock.now();
        self.state.escrow.check_open(token_id, &self.state.tokens)?;
        terms.validate()?;
        self.expire_lapsed_for(token_id, now)?;
        let (order, t) = self.stage_order(token_id, &terms, now)?;
        self.commit(vec![t])?;
        self.record_order(order)
    }

    pub fn order(&self, order_id: &str) -> Result<&PaymentOrder> {
        self.gateway.get(order_id)
    }

    /// Student completes the payment; the outcome is queued for the oracle.
    pub fn complete_payment(&mut self, order_id: &str, payer: WalletAddress) -> Result<OracleMessage> {
        let now = self.clock.now();
        match self.gateway.complete(order_id, payer, now) {
            Ok((message, events)) => {
                self.journal_gateway(&events)?;
                Ok(message)
            }
            Err((err, events)) => {
                self.journal_gateway(&events)?;
                Err(err)
            }
        }
    }

    pub fn fail_order(&mut self, order_id: &str) -> Result<OracleMessage> {
        let now = self.clock.now();
        let (message, events) = self.gateway.fail(order_id, now)?;
        self.journal_gateway(&events)?;
        Ok(message)
    }

    pub fn expire_orders(&mut self, now: Timestamp) -> Result<Vec<String>> {
        let (expired, events) = self.gateway.expire_due(now);
        self.journal_gateway(&events)?;
        Ok(expired)
    }

    /// Puts a message back on the oracle queue (at-least-once redelivery).
    pub fn redeliver(&mut self, message: OracleMessage) -> Result<()> {
        let event = self.gateway.enqueue(message);
        self.journal_gateway(&[event])
    }

    /// Relays every queued gateway outcome to the escrow contract. Returns
    /// the messages handed over; unknown orders are dropped with a warning.
    pub fn oracle_drain(&mut self) -> Result<Vec<OracleMessage>> {
        let messages = self.gateway.take_outbox();
        for message in &messages {
            if let Err(e) = self.on_payment_result(message) {
                match e {
                    Error::NotFound { .. } | Error::InvalidInput(_) => {
                        tracing::warn!(order = %message.order_id, error = %e, "dropping undeliverable oracle message");
                    }
                    other => return Err(other),
                }
            }
            self.journal_gateway(&[GatewayEvent::Delivered {
                delivery_id: message.delivery_id.clone(),
            }])?;
        }
        Ok(messages)
    }

    // ----- escrow -----

    /// Mints into escrow and opens the payment order in one block.
    pub fn begin_mint(
        &mut self,
        creator: WalletAddress,
        metadata: CertificateMetadata,
        terms: OrderTerms,
    ) -> Result<(TokenId, PaymentOrder)> {
        let now = self.clock.now();
        terms.validate()?;
        let (token_id, mint) = self.stage_mint(creator, metadata)?;
        #[cfg(feature = "fault-injection")]
        self.check_fault(FaultPoint::BetweenMintAndOrder)?;
        let (order, open) = self.stage_order(token_id, &terms, now)?;
        self.commit(vec![mint, open])?;
        let order = self.record_order(order)?;
        Ok((token_id, order))
    }

    /// Builds metadata from identity + certificate fields, then `begin_mint`.
    /// The identity fields only reach the hash.
    pub fn issue_certificate(
        &mut self,
        creator: WalletAddress,
        personal: &PersonalInfo,
        fields: CertificateFields,
        terms: OrderTerms,
    ) -> Result<(TokenId, PaymentOrder)> {
        personal.validate()?;
        let metadata = build_metadata(personal, fields)?;
        self.begin_mint(creator, metadata, terms)
    }

    /// The escrow contract's handler for oracle deliveries. Duplicate
    /// deliveries and messages for superseded orders change nothing.
    pub fn on_payment_result(&mut self, message: &OracleMessage) -> Result<EscrowRecord> {
        let plan = self.state.escrow.plan_payment_result(message)?;
        if let Some(payload) = plan {
            self.commit(payload)?;
        }
        self.state.escrow.by_order(&message.order_id).cloned()
    }

    pub fn pending_escrows(&self) -> Vec<EscrowRecord> {
        self.state.escrow.pending()
    }

    pub fn escrow_of(&self, token_id: TokenId) -> Option<&EscrowRecord> {
        self.state.escrow.get(token_id)
    }

    // ----- storage & revocation -----

    pub fn put_image(&mut self, bytes: &[u8], content_type: &str, backend: Backend) -> Result<String> {
        self.storage.put_image(bytes, content_type, backend)
    }

    pub fn get_by_uri(&self, uri: &str) -> Result<StoredObject> {
        self.storage.get_by_uri(uri)
    }

    pub fn is_revoked(&self, uri: &str) -> Result<bool> {
        self.storage.is_revoked(uri)
    }

    /// Replaces the certificate image behind the token's URI with `notice`
    /// and notes the revocation on-chain.
    pub fn revoke_certificate(&mut self, token_id: TokenId, notice: &[u8]) -> Result<()> {
        let uri = self.token(token_id)?.metadata.certificate_uri.clone();
        self.storage.revoke_certificate(&uri, notice)?;
        if !self.state.revocations.contains_key(&uri) {
            let revoked_at = self.clock.now();
            self.commit(vec![Transition::CertificateRevoked {
                token_id,
                uri,
                revoked_at,
            }])?;
        }
        Ok(())
    }

    // ----- verification -----

    pub fn verification_inputs(&self) -> VerificationInputs<'_> {
        VerificationInputs {
            registry: &self.state.registry,
            published: &self.published,
            images: &self.storage,
        }
    }

    pub fn full_verification(
        &self,
        personal: &PersonalInfo,
        token_id: TokenId,
        claimed_wallet: &WalletAddress,
    ) -> Result<VerificationReport> {
        let token = self.token(token_id)?;
        Ok(verify::full_verification(
            &self.verification_inputs(),
            personal,
            token,
            claimed_wallet,
        ))
    }

    pub fn sync(&self) -> Result<()> {
        self.ledger.sync()
    }
}
