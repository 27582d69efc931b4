use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::escrow::EscrowBook;
use crate::ledger::{LedgerBlock, Registry};
use crate::token::{TokenBook, TokenId};
use crate::transition::Transition;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevocationRecord {
    pub token_id: TokenId,
    pub revoked_at: Timestamp,
    pub block_index: u64,
}

/// Everything derivable from the ledger: registry, tokens, escrows and
/// on-chain revocation notes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    pub registry: Registry,
    pub tokens: TokenBook,
    pub escrow: EscrowBook,
    pub revocations: BTreeMap<String, RevocationRecord>,
}

impl ChainState {
    /// Folds every block's payload, in order, from an empty state.
    pub fn replay<'a>(blocks: impl IntoIterator<Item = &'a LedgerBlock>) -> Result<Self> {
        let mut state = ChainState::default();
        for block in blocks {
            for t in &block.payload {
                state.apply(t, block.index).map_err(|e| {
                    Error::IntegrityViolation(format!(
                        "block {} {} transition does not replay: {e}",
                        block.index,
                        t.kind()
                    ))
                })?;
            }
        }
        Ok(state)
    }

    pub fn apply(&mut self, transition: &Transition, block_index: u64) -> Result<()> {
        match transition {
            Transition::Genesis { .. } => {
                if block_index != 0 {
                    return Err(Error::InvalidState("genesis outside block 0".into()));
                }
                Ok(())
            }
            Transition::InstitutionRegistered { record } => self.registry.apply_register(record.clone()),
            Transition::TokenMinted {
                token_id,
                creator,
                metadata,
            } => {
                if !self.registry.is_accredited(creator) {
                    return Err(Error::NotAccredited(creator.to_string()));
                }
                self.tokens.apply_mint(*token_id, *creator, metadata.clone(), block_index)
            }
            Transition::TokenTransferred { token_id, from, to } => {
                self.tokens.apply_transfer(*token_id, *from, *to, block_index)
            }
            Transition::EscrowOpened {
                token_id, order_id, ..
            } => {
                self.escrow.check_open(*token_id, &self.tokens)?;
                self.escrow.apply_open(*token_id, order_id)
            }
            Transition::PaymentSettled {
                token_id,
                order_id,
                delivery_id,
                outcome,
                ..
            } => self.escrow.apply_settled(*token_id, order_id, delivery_id, *outcome),
            Transition::CertificateRevoked {
                token_id,
                uri,
                revoked_at,
            } => {
                self.tokens.get(*token_id)?;
                self.revocations.insert(
                    uri.clone(),
                    RevocationRecord {
                        token_id: *token_id,
                        revoked_at: *revoked_at,
                        block_index,
                    },
                );
                Ok(())
            }
        }
    }

    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("chain state serializes")
    }

    /// SHA-256 over the canonical JSON encoding of the state.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_canonical_bytes()).into()
    }
}
