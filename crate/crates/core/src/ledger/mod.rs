//! Hash-chained ledger, wallets, and the institution registry.

mod block;
mod chain;
mod registry;
mod wallet;

pub use block::{canonical_bytes, compute_block_hash, decode_frames, encode_record, BlockHash, LedgerBlock};
pub use chain::{genesis_block, validate_blocks, validate_chain_file, Ledger, ValidationReport, GENESIS_NETWORK};
pub use registry::{InstitutionRecord, PublishedDirectory, Registry};
pub use wallet::{derive_address, generate_keypair, KeyPair, WalletAddress, ADDRESS_LEN, PUBLIC_KEY_LEN};
