//! Block structure and its canonical byte encoding.
//!
//! Fields are concatenated in declaration order. Integers are 8-byte
//! big-endian; byte strings carry an 8-byte length prefix. Each payload
//! record is its JSON encoding, length-prefixed. The block hash is SHA-256
//! over `index ‖ prev_hash ‖ payload ‖ timestamp` in that encoding.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::transition::Transition;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BlockHash(pub [u8; 32]);

impl BlockHash {
    pub const ZERO: BlockHash = BlockHash([0u8; 32]);
}

impl fmt::Display for BlockHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for BlockHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockHash({self})")
    }
}

impl Serialize for BlockHash {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BlockHash {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
        Ok(BlockHash(out))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerBlock {
    pub index: u64,
    pub prev_hash: BlockHash,
    pub payload: Vec<Transition>,
    pub timestamp: Timestamp,
    pub block_hash: BlockHash,
}

impl LedgerBlock {
    pub fn new(index: u64, prev_hash: BlockHash, payload: Vec<Transition>, timestamp: Timestamp) -> Self {
        let block_hash = compute_block_hash(index, &prev_hash, &payload, timestamp);
        LedgerBlock {
            index,
            prev_hash,
            payload,
            timestamp,
            block_hash,
        }
    }

    pub fn recompute_hash(&self) -> BlockHash {
        compute_block_hash(self.index, &self.prev_hash, &self.payload, self.timestamp)
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        canonical_bytes(self.index, &self.prev_hash, &self.payload, self.timestamp)
    }

    /// On-disk frame: `len(canonical) ‖ canonical ‖ block_hash`.
    pub fn encode_frame(&self) -> Vec<u8> {
        let body = self.canonical_bytes();
        let mut out = Vec::with_capacity(8 + body.len() + 32);
        out.extend_from_slice(&(body.len() as u64).to_be_bytes());
        out.extend_from_slice(&body);
        out.extend_from_slice(&self.block_hash.0);
        out
    }
}

pub fn encode_record(t: &Transition) -> Vec<u8> {
    serde_json::to_vec(t).expect("transition serializes")
}

pub fn canonical_bytes(index: u64, prev_hash: &BlockHash, payload: &[Transition], timestamp: Timestamp) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&index.to_be_bytes());
    put_bytes(&mut out, &prev_hash.0);
    out.extend_from_slice(&(payload.len() as u64).to_be_bytes());
    for record in payload {
        put_bytes(&mut out, &encode_record(record));
    }
    out.extend_from_slice(&timestamp.to_be_bytes());
    out
}

pub fn compute_block_hash(index: u64, prev_hash: &BlockHash, payload: &[Transition], timestamp: Timestamp) -> BlockHash {
    BlockHash(Sha256::digest(canonical_bytes(index, prev_hash, payload, timestamp)).into())
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u64).to_be_bytes());
    out.extend_from_slice(bytes);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Codec(format!("truncated: need {n} bytes at offset {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let len = self.u64()?;
        let len = usize::try_from(len).map_err(|_| Error::Codec("length overflow".into()))?;
        self.take(len)
    }
}

/// Parses canonical block bytes. The hash is supplied by the caller.
pub fn decode_canonical(body: &[u8], block_hash: BlockHash) -> Result<LedgerBlock> {
    let mut r = Reader { buf: body, pos: 0 };
    let index = r.u64()?;
    let prev: [u8; 32] = r
        .bytes()?
        .try_into()
        .map_err(|_| Error::Codec("prev_hash must be 32 bytes".into()))?;
    let count = r.u64()?;
    let mut payload = Vec::new();
    for _ in 0..count {
        let raw = r.bytes()?;
        let record: Transition =
            serde_json::from_slice(raw).map_err(|e| Error::Codec(format!("payload record: {e}")))?;
        payload.push(record);
    }
    let timestamp = r.u64()? as i64;
    if r.pos != body.len() {
        return Err(Error::Codec("trailing bytes in block body".into()));
    }
    Ok(LedgerBlock {
        index,
        prev_hash: BlockHash(prev),
        payload,
        timestamp,
        block_hash,
    })
}

/// Splits a chain file into frames, decoding each. Stops at the first frame
/// that cannot be decoded and returns the failure with its position.
pub fn decode_frames(bytes: &[u8]) -> (Vec<LedgerBlock>, Option<(u64, String)>) {
    let mut blocks = Vec::new();
    let mut r = Reader { buf: bytes, pos: 0 };
    while r.pos < bytes.len() {
        let position = blocks.len() as u64;
        let frame = r.bytes().and_then(|body| {
            let hash: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
            let block = decode_canonical(body, BlockHash(hash))?;
            // The stored bytes are what was hashed; a body that only decodes
            // to the same value (say, hex in another case) is still tampering.
            if block.canonical_bytes() != body {
                return Err(Error::Codec("block body is not in canonical form".into()));
            }
            Ok(block)
        });
        match frame {
            Ok(block) => blocks.push(block),
            Err(e) => return (blocks, Some((position, e.to_string()))),
        }
    }
    (blocks, None)
}
