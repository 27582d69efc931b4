use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::WalletAddress;
use crate::clock::Timestamp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionRecord {
    pub name: String,
    pub wallet: WalletAddress,
    pub registered_at: Timestamp,
    /// Where the institution announces its wallet (its official website).
    pub published_uri: String,
}

/// Membership registry of accredited institutions, keyed by wallet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    institutions: BTreeMap<WalletAddress, InstitutionRecord>,
}

impl Registry {
    pub fn is_accredited(&self, wallet: &WalletAddress) -> bool {
        self.institutions.contains_key(wallet)
    }

    pub fn lookup(&self, wallet: &WalletAddress) -> Option<&InstitutionRecord> {
        self.institutions.get(wallet)
    }

    pub fn iter(&self) -> impl Iterator<Item = &InstitutionRecord> {
        self.institutions.values()
    }

    pub fn len(&self) -> usize {
        self.institutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.institutions.is_empty()
    }

    pub fn check_register(&self, record: &InstitutionRecord) -> Result<()> {
        if record.name.is_empty() {
            return Err(Error::InvalidInput("institution name must be non-empty".into()));
        }
        if record.published_uri.is_empty() {
            return Err(Error::InvalidInput("published_uri must be non-empty".into()));
        }
        if record.wallet.is_zero() {
            return Err(Error::InvalidInput("the zero address cannot be registered".into()));
        }
        if self.is_accredited(&record.wallet) {
            return Err(Error::AlreadyRegistered(record.wallet.to_string()));
        }
        Ok(())
    }

    pub(crate) fn apply_register(&mut self, record: InstitutionRecord) -> Result<()> {
        self.check_register(&record)?;
        self.institutions.insert(record.wallet, record);
        Ok(())
    }
}

/// Simulated publication channel: what each official website currently
/// announces as the institution's wallet. Lives off-chain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedDirectory {
    entries: BTreeMap<String, WalletAddress>,
}

impl PublishedDirectory {
    pub fn publish(&mut self, uri: impl Into<String>, wallet: WalletAddress) {
        self.entries.insert(uri.into(), wallet);
    }

    pub fn resolve(&self, uri: &str) -> Option<WalletAddress> {
        self.entries.get(uri).copied()
    }
}
