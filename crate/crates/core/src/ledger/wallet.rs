use std::fmt;
use std::str::FromStr;

use ed25519_dalek::SigningKey;
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SECRET_KEY_LEN: usize = 32;
pub const PUBLIC_KEY_LEN: usize = 32;
pub const ADDRESS_LEN: usize = 20;

/// Ed25519 key pair backing a digital wallet.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    private_key: [u8; SECRET_KEY_LEN],
    public_key: [u8; PUBLIC_KEY_LEN],
}

impl KeyPair {
    pub fn private_key(&self) -> &[u8; SECRET_KEY_LEN] {
        &self.private_key
    }

    pub fn public_key(&self) -> &[u8; PUBLIC_KEY_LEN] {
        &self.public_key
    }

    pub fn address(&self) -> WalletAddress {
        WalletAddress::from_public_key(&self.public_key)
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public_key", &hex::encode(self.public_key))
            .finish_non_exhaustive()
    }
}

/// Generates a key pair, deterministically when `seed` is given.
pub fn generate_keypair(seed: Option<&[u8]>) -> Result<KeyPair> {
    let secret: [u8; SECRET_KEY_LEN] = match seed {
        Some(bytes) => bytes.try_into().map_err(|_| {
            Error::InvalidInput(format!(
                "seed must be exactly {SECRET_KEY_LEN} bytes, got {}",
                bytes.len()
            ))
        })?,
        None => {
            let mut buf = [0u8; SECRET_KEY_LEN];
            OsRng.fill_bytes(&mut buf);
            buf
        }
    };
    let signing = SigningKey::from_bytes(&secret);
    Ok(KeyPair {
        private_key: secret,
        public_key: signing.verifying_key().to_bytes(),
    })
}

/// Last 20 bytes of SHA-256 over the public key bytes.
pub fn derive_address(public_key: &[u8]) -> Result<WalletAddress> {
    let key: &[u8; PUBLIC_KEY_LEN] = public_key.try_into().map_err(|_| {
        Error::InvalidInput(format!(
            "public key must be {PUBLIC_KEY_LEN} bytes, got {}",
            public_key.len()
        ))
    })?;
    Ok(WalletAddress::from_public_key(key))
}

/// 20-byte wallet identifier, displayed as `0x` followed by 40 lowercase hex digits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WalletAddress([u8; ADDRESS_LEN]);

impl WalletAddress {
    /// The escrow sentinel `0x000…000`.
    pub const ZERO: WalletAddress = WalletAddress([0u8; ADDRESS_LEN]);

    pub fn from_bytes(bytes: [u8; ADDRESS_LEN]) -> Self {
        WalletAddress(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; ADDRESS_LEN] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0u8; ADDRESS_LEN]
    }

    fn from_public_key(key: &[u8; PUBLIC_KEY_LEN]) -> Self {
        let digest = Sha256::digest(key);
        let mut out = [0u8; ADDRESS_LEN];
        out.copy_from_slice(&digest[digest.len() - ADDRESS_LEN..]);
        WalletAddress(out)
    }
}

impl fmt::Display for WalletAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for WalletAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for WalletAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let hex_part = s
            .strip_prefix("0x")
            .ok_or_else(|| Error::InvalidInput(format!("address `{s}` lacks 0x prefix")))?;
        if hex_part.len() != ADDRESS_LEN * 2 {
            return Err(Error::InvalidInput(format!(
                "address `{s}` must have {} hex digits",
                ADDRESS_LEN * 2
            )));
        }
        let mut out = [0u8; ADDRESS_LEN];
        hex::decode_to_slice(hex_part, &mut out)
            .map_err(|e| Error::InvalidInput(format!("address `{s}`: {e}")))?;
        Ok(WalletAddress(out))
    }
}

impl Serialize for WalletAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WalletAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
