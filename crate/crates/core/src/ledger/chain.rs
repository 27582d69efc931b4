use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::block::{decode_frames, BlockHash, LedgerBlock};
use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::transition::Transition;

pub const GENESIS_NETWORK: &str = "nftcert";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ValidationReport {
    Valid { blocks: u64 },
    Invalid { first_bad_index: u64, reason: String },
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationReport::Valid { .. })
    }

    pub fn first_bad_index(&self) -> Option<u64> {
        match self {
            ValidationReport::Valid { .. } => None,
            ValidationReport::Invalid { first_bad_index, .. } => Some(*first_bad_index),
        }
    }
}

pub fn genesis_block() -> LedgerBlock {
    LedgerBlock::new(
        0,
        BlockHash::ZERO,
        vec![Transition::Genesis {
            network: GENESIS_NETWORK.to_string(),
        }],
        0,
    )
}

/// Checks position, hash, and link of every block, reporting the lowest
/// inconsistent index.
pub fn validate_blocks(blocks: &[LedgerBlock]) -> ValidationReport {
    let mut prev = BlockHash::ZERO;
    for (i, block) in blocks.iter().enumerate() {
        let i = i as u64;
        let reason = if block.index != i {
            Some(format!("index field is {}", block.index))
        } else if block.prev_hash != prev {
            Some("prev_hash does not link to the previous block".to_string())
        } else if block.recompute_hash() != block.block_hash {
            Some("block hash does not recompute".to_string())
        } else if block.payload.is_empty() {
            Some("empty payload".to_string())
        } else if i == 0 && *block != genesis_block() {
            Some("genesis block differs from the canonical genesis".to_string())
        } else {
            None
        };
        if let Some(reason) = reason {
            return ValidationReport::Invalid {
                first_bad_index: i,
                reason,
            };
        }
        prev = block.block_hash;
    }
    if blocks.is_empty() {
        return ValidationReport::Invalid {
            first_bad_index: 0,
            reason: "missing genesis block".into(),
        };
    }
    ValidationReport::Valid {
        blocks: blocks.len() as u64,
    }
}

fn validate_bytes(bytes: &[u8]) -> (Vec<LedgerBlock>, ValidationReport) {
    let (blocks, decode_error) = decode_frames(bytes);
    let report = validate_blocks(&blocks);
    let report = match (report, decode_error) {
        (ValidationReport::Invalid { first_bad_index, reason }, Some((pos, _))) if first_bad_index < pos => {
            ValidationReport::Invalid { first_bad_index, reason }
        }
        (_, Some((pos, err))) => ValidationReport::Invalid {
            first_bad_index: pos,
            reason: format!("undecodable frame: {err}"),
        },
        (report, None) => report,
    };
    (blocks, report)
}

/// Audits a chain file without opening it for writing.
pub fn validate_chain_file(path: &Path) -> Result<ValidationReport> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(validate_bytes(&bytes).1)
}

/// Append-only hash chain, optionally mirrored to a file.
#[derive(Debug)]
pub struct Ledger {
    blocks: Vec<LedgerBlock>,
    file: Option<(PathBuf, File)>,
}

impl Ledger {
    pub fn in_memory() -> Self {
        Ledger {
            blocks: vec![genesis_block()],
            file: None,
        }
    }

    /// Opens `path`, creating it with a genesis block when absent. An
    /// existing file must validate in full.
    pub fn open(path: &Path) -> Result<Self> {
        let exists = path.exists();
        let blocks = if exists {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let (blocks, report) = validate_bytes(&bytes);
            if let ValidationReport::Invalid { first_bad_index, reason } = report {
                return Err(Error::IntegrityViolation(format!(
                    "{} is invalid at block {first_bad_index}: {reason}",
                    path.display()
                )));
            }
            blocks
        } else {
            vec![]
        };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let blocks = if blocks.is_empty() {
            let genesis = genesis_block();
            file.write_all(&genesis.encode_frame())
                .and_then(|_| file.sync_data())
                .map_err(|e| Error::io(path, e))?;
            vec![genesis]
        } else {
            blocks
        };
        Ok(Ledger {
            blocks,
            file: Some((path.to_path_buf(), file)),
        })
    }

    pub fn blocks(&self) -> &[LedgerBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn head(&self) -> &LedgerBlock {
        self.blocks.last().expect("ledger always holds genesis")
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_ref().map(|(p, _)| p.as_path())
    }

    pub fn append_block(&mut self, payload: Vec<Transition>, timestamp: Timestamp) -> Result<&LedgerBlock> {
        if payload.is_empty() {
            return Err(Error::InvalidInput("block payload must be non-empty".into()));
        }
        let head = self.head();
        let block = LedgerBlock::new(head.index + 1, head.block_hash, payload, timestamp);
        if let Some((path, file)) = self.file.as_mut() {
            let before = file.metadata().map_err(|e| Error::io(&*path, e))?.len();
            if let Err(e) = file.write_all(&block.encode_frame()) {
                // Drop any torn frame so the file stays a valid prefix.
                let _ = file.set_len(before);
                return Err(Error::io(&*path, e));
            }
        }
        self.blocks.push(block);
        Ok(self.head())
    }

    pub fn validate_chain(&self) -> ValidationReport {
        validate_blocks(&self.blocks)
    }

    pub fn sync(&self) -> Result<()> {
        if let Some((path, file)) = &self.file {
            file.sync_data().map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}
