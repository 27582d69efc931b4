#![allow(dead_code)]

pub mod scenario;
pub mod sha256_ref;

use std::path::Path;
use std::sync::Arc;

use nftcert_core::ledger::generate_keypair;
use nftcert_core::{
    CertSystem, CertificateFields, FixedClock, OrderTerms, PersonalInfo, TokenId, WalletAddress,
};
use rand::distributions::Alphanumeric;
use rand::Rng;

pub const T0: i64 = 1_700_000_000;
pub const BASE_URL: &str = "https://uni-a.example";

pub fn wallet(seed: u8) -> WalletAddress {
    generate_keypair(Some(&[seed; 32])).unwrap().address()
}

pub fn random_wallet(rng: &mut impl Rng) -> WalletAddress {
    let seed: [u8; 32] = rng.gen();
    generate_keypair(Some(&seed)).unwrap().address()
}

pub fn john() -> PersonalInfo {
    PersonalInfo::new("John", "1995-01-01", "Boston", "USA").unwrap()
}

pub fn john_fields() -> CertificateFields {
    CertificateFields::new(
        "University A",
        "Bachelor of Science",
        "2020-06-30",
        "https://uni-a.example/certs/john.png",
    )
}

pub fn usd(amount: &str) -> OrderTerms {
    OrderTerms::new(amount.parse().unwrap(), "USD".parse().unwrap(), 3600)
}

fn token(rng: &mut impl Rng, prefix: &str, len: usize) -> String {
    let tail: String = rng.sample_iter(&Alphanumeric).take(len).map(char::from).collect();
    format!("{prefix}{tail}")
}

/// Identity fields drawn so that none can collide with anything else the
/// system writes: distinctive prefixes, long random tails, and birth years
/// that never overlap conferral years.
pub fn random_personal(rng: &mut impl Rng) -> PersonalInfo {
    let dob = format!(
        "{:04}-{:02}-{:02}",
        rng.gen_range(1950..=2005),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28)
    );
    PersonalInfo::new(
        token(rng, "Stu", 14),
        dob,
        token(rng, "Bpl", 14),
        token(rng, "Nat", 10),
    )
    .unwrap()
}

pub fn random_degree(rng: &mut impl Rng) -> String {
    const TITLES: &[&str] = &[
        "Bachelor of Science",
        "Master of Arts",
        "Doctor of Philosophy",
        "Certificate in Welding",
        "Diploma of Culinary Arts",
        "学士学位",
    ];
    TITLES[rng.gen_range(0..TITLES.len())].to_string()
}

pub fn random_conferral(rng: &mut impl Rng) -> String {
    format!(
        "{:04}-{:02}-{:02}",
        rng.gen_range(2010..=2024),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28)
    )
}

pub fn memory_system(clock: &FixedClock) -> CertSystem {
    CertSystem::in_memory(Arc::new(clock.clone()), BASE_URL)
}

pub fn disk_system(dir: &Path, clock: &FixedClock) -> CertSystem {
    CertSystem::open(dir, Arc::new(clock.clone()), BASE_URL).unwrap()
}

/// Registers "University A" under wallet seed 0xA1 and returns its address.
pub fn register_university_a(system: &mut CertSystem) -> WalletAddress {
    let addr = wallet(0xA1);
    system
        .register_institution("University A", addr, "https://uni-a.example/wallet")
        .unwrap();
    addr
}

/// Uploads an image, issues the certificate into escrow, pays, and relays.
pub fn issue_and_pay(
    system: &mut CertSystem,
    institution: WalletAddress,
    institution_name: &str,
    personal: &PersonalInfo,
    student: WalletAddress,
    rng: &mut impl Rng,
) -> TokenId {
    let image = format!("certificate image {}", rng.gen::<u64>());
    let uri = system
        .put_image(image.as_bytes(), "image/png", nftcert_core::Backend::Mutable)
        .unwrap();
    let fields = CertificateFields::new(institution_name, random_degree(rng), random_conferral(rng), uri);
    let (token_id, order) = system
        .issue_certificate(institution, personal, fields, usd("50.00"))
        .unwrap();
    system.complete_payment(&order.order_id, student).unwrap();
    system.oracle_drain().unwrap();
    token_id
}

/// Every file under `dir`, concatenated.
pub fn dir_bytes(dir: &Path) -> Vec<u8> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.extend(std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

pub fn contains(haystack: &[u8], needle: &str) -> bool {
    let needle = needle.as_bytes();
    haystack.windows(needle.len()).any(|w| w == needle)
}

pub fn assert_no_pii(bytes: &[u8], personal: &PersonalInfo) {
    for field in personal.fields() {
        assert!(!contains(bytes, field), "personal field leaked");
    }
}

/// Byte ranges of each framed block in a chain file: `(index, start, end)`.
pub fn frame_spans(bytes: &[u8]) -> Vec<(u64, usize, usize)> {
    let mut spans = Vec::new();
    let mut pos = 0;
    let mut index = 0;
    while pos + 8 <= bytes.len() {
        let len = u64::from_be_bytes(bytes[pos..pos + 8].try_into().unwrap()) as usize;
        let end = pos + 8 + len + 32;
        spans.push((index, pos, end));
        pos = end;
        index += 1;
    }
    assert_eq!(pos, bytes.len(), "chain file does not frame cleanly");
    spans
}

/// Index of the block whose frame contains byte `offset`.
pub fn block_at(spans: &[(u64, usize, usize)], offset: usize) -> u64 {
    spans
        .iter()
        .find(|(_, start, end)| (*start..*end).contains(&offset))
        .map(|(i, _, _)| *i)
        .unwrap()
}
