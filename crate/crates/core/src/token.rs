//! Non-fungible certificate tokens: mint, transfer, and provenance history.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::certificate::CertificateMetadata;
use crate::error::{Error, Result};
use crate::ledger::WalletAddress;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u64);

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub from: WalletAddress,
    pub to: WalletAddress,
    pub block_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NftToken {
    pub id: TokenId,
    pub creator: WalletAddress,
    pub owner: WalletAddress,
    pub metadata: CertificateMetadata,
    pub history: Vec<TransferRecord>,
}

/// All minted tokens plus an owner index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBook {
    tokens: BTreeMap<TokenId, NftToken>,
    by_owner: BTreeMap<WalletAddress, BTreeSet<TokenId>>,
}

impl TokenBook {
    pub fn next_id(&self) -> TokenId {
        TokenId(self.tokens.len() as u64 + 1)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, id: TokenId) -> Result<&NftToken> {
        self.tokens.get(&id).ok_or_else(|| Error::not_found("token", id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &NftToken> {
        self.tokens.values()
    }

    pub fn owner_of(&self, id: TokenId) -> Result<WalletAddress> {
        self.get(id).map(|t| t.owner)
    }

    pub fn creator_of(&self, id: TokenId) -> Result<WalletAddress> {
        self.get(id).map(|t| t.creator)
    }

    pub fn history(&self, id: TokenId) -> Result<&[TransferRecord]> {
        self.get(id).map(|t| t.history.as_slice())
    }

    /// Ascending ids of tokens currently owned by `wallet`.
    pub fn tokens_of_wallet(&self, wallet: &WalletAddress) -> Vec<TokenId> {
        self.by_owner
            .get(wallet)
            .map(|ids| ids.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn check_mint(&self, id: TokenId) -> Result<()> {
        if id != self.next_id() {
            return Err(Error::InvalidState(format!(
                "mint of token {id} out of sequence, expected {}",
                self.next_id()
            )));
        }
        Ok(())
    }

    pub fn check_transfer(&self, id: TokenId, from: &WalletAddress) -> Result<()> {
        let token = self.get(id)?;
        if token.owner != *from {
            return Err(Error::NotOwner {
                token: id.0,
                claimed: from.to_string(),
            });
        }
        Ok(())
    }

    pub(crate) fn apply_mint(
        &mut self,
        id: TokenId,
        creator: WalletAddress,
        metadata: CertificateMetadata,
        block_index: u64,
    ) -> Result<()> {
        self.check_mint(id)?;
        let owner = WalletAddress::ZERO;
        self.tokens.insert(
            id,
            NftToken {
                id,
                creator,
                owner,
                metadata,
                history: vec![TransferRecord {
                    from: WalletAddress::ZERO,
                    to: owner,
                    block_index,
                }],
            },
        );
        self.by_owner.entry(owner).or_default().insert(id);
        Ok(())
    }

    pub(crate) fn apply_transfer(
        &mut self,
        id: TokenId,
        from: WalletAddress,
        to: WalletAddress,
        block_index: u64,
    ) -> Result<()> {
        self.check_transfer(id, &from)?;
        let token = self.tokens.get_mut(&id).expect("checked above");
        token.owner = to;
        token.history.push(TransferRecord {
            from,
            to,
            block_index,
        });
        if let Some(ids) = self.by_owner.get_mut(&from) {
            ids.remove(&id);
            if ids.is_empty() {
                self.by_owner.remove(&from);
            }
        }
        self.by_owner.entry(to).or_default().insert(id);
        Ok(())
    }
}
