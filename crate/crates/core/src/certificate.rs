//! Certificate metadata schema and the identity-binding hash signature.
//!
//! The signature is SHA-256 over eight fields, each UTF-8 encoded and
//! terminated by a single `\n`, in this order: student name, date of birth,
//! birthplace, nationality, institution name, degree title, conferral date,
//! certificate URI. Nothing is trimmed or case-folded.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const KEY_INSTITUTION_NAME: &str = "institution_name";
pub const KEY_DEGREE_TITLE: &str = "degree_title";
pub const KEY_CONFERRAL_DATE: &str = "degree_conferral_date";
pub const KEY_CERTIFICATE_URI: &str = "certificate_URI";
pub const KEY_HASH: &str = "hash";

/// Metadata JSON keys, in serialization order.
pub const METADATA_KEYS: [&str; 5] = [
    KEY_INSTITUTION_NAME,
    KEY_DEGREE_TITLE,
    KEY_CONFERRAL_DATE,
    KEY_CERTIFICATE_URI,
    KEY_HASH,
];

/// Off-chain identity fields. Never stored in a token or on the ledger.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonalInfo {
    pub student_name: String,
    pub date_of_birth: String,
    pub birthplace: String,
    pub nationality: String,
}

impl PersonalInfo {
    pub fn new(
        student_name: impl Into<String>,
        date_of_birth: impl Into<String>,
        birthplace: impl Into<String>,
        nationality: impl Into<String>,
    ) -> Result<Self> {
        let info = PersonalInfo {
            student_name: student_name.into(),
            date_of_birth: date_of_birth.into(),
            birthplace: birthplace.into(),
            nationality: nationality.into(),
        };
        info.validate()?;
        Ok(info)
    }

    pub fn validate(&self) -> Result<()> {
        require_non_empty("student_name", &self.student_name)?;
        require_non_empty("date_of_birth", &self.date_of_birth)?;
        require_non_empty("birthplace", &self.birthplace)?;
        require_non_empty("nationality", &self.nationality)?;
        if !is_iso_date(&self.date_of_birth) {
            return Err(Error::InvalidInput(
                "date_of_birth must be a valid YYYY-MM-DD date".into(),
            ));
        }
        Ok(())
    }

    /// The four identity fields, in hashing order.
    pub fn fields(&self) -> [&str; 4] {
        [
            &self.student_name,
            &self.date_of_birth,
            &self.birthplace,
            &self.nationality,
        ]
    }
}

impl fmt::Debug for PersonalInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PersonalInfo { <redacted> }")
    }
}

/// The public, certificate-related hash inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFields {
    pub institution_name: String,
    pub degree_title: String,
    pub degree_conferral_date: String,
    pub certificate_uri: String,
}

impl CertificateFields {
    pub fn new(
        institution_name: impl Into<String>,
        degree_title: impl Into<String>,
        degree_conferral_date: impl Into<String>,
        certificate_uri: impl Into<String>,
    ) -> Self {
        CertificateFields {
            institution_name: institution_name.into(),
            degree_title: degree_title.into(),
            degree_conferral_date: degree_conferral_date.into(),
            certificate_uri: certificate_uri.into(),
        }
    }

    pub fn fields(&self) -> [&str; 4] {
        [
            &self.institution_name,
            &self.degree_title,
            &self.degree_conferral_date,
            &self.certificate_uri,
        ]
    }
}

const HASH_INPUT_NAMES: [&str; 8] = [
    "student_name",
    "date_of_birth",
    "birthplace",
    "nationality",
    "institution_name",
    "degree_title",
    "degree_conferral_date",
    "certificate_uri",
];

pub fn canonical_hash_input(personal: &PersonalInfo, cert: &CertificateFields) -> Result<Vec<u8>> {
    let values = personal.fields().into_iter().chain(cert.fields());
    let mut out = Vec::new();
    for (name, value) in HASH_INPUT_NAMES.iter().zip(values) {
        require_non_empty(name, value)?;
        out.extend_from_slice(value.as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

pub fn compute_signature(personal: &PersonalInfo, cert: &CertificateFields) -> Result<HashSignature> {
    let input = canonical_hash_input(personal, cert)?;
    Ok(HashSignature(Sha256::digest(&input).into()))
}

/// Builds on-chain metadata. The personal fields only feed the signature.
pub fn build_metadata(personal: &PersonalInfo, cert: CertificateFields) -> Result<CertificateMetadata> {
    let signature = compute_signature(personal, &cert)?;
    Ok(CertificateMetadata {
        institution_name: cert.institution_name,
        degree_title: cert.degree_title,
        degree_conferral_date: cert.degree_conferral_date,
        certificate_uri: cert.certificate_uri,
        hash_signature: signature.to_hex(),
    })
}

/// 32-byte SHA-256 digest rendered as 64 lowercase hex characters.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashSignature([u8; 32]);

impl HashSignature {
    pub fn from_digest(digest: [u8; 32]) -> Self {
        HashSignature(digest)
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for HashSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for HashSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashSignature({self})")
    }
}

impl FromStr for HashSignature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if !is_lower_hex_digest(s) {
            return Err(Error::schema(
                KEY_HASH,
                "expected 64 lowercase hexadecimal characters",
            ));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| Error::schema(KEY_HASH, e.to_string()))?;
        Ok(HashSignature(out))
    }
}

impl Serialize for HashSignature {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HashSignature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// On-chain certificate record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateMetadata {
    pub institution_name: String,
    pub degree_title: String,
    pub degree_conferral_date: String,
    #[serde(rename = "certificate_URI")]
    pub certificate_uri: String,
    #[serde(rename = "hash")]
    pub hash_signature: String,
}

impl CertificateMetadata {
    pub fn fields(&self) -> CertificateFields {
        CertificateFields {
            institution_name: self.institution_name.clone(),
            degree_title: self.degree_title.clone(),
            degree_conferral_date: self.degree_conferral_date.clone(),
            certificate_uri: self.certificate_uri.clone(),
        }
    }
}

pub fn serialize_metadata(metadata: &CertificateMetadata) -> String {
    serde_json::to_string(metadata).expect("metadata serializes")
}

/// Strict parse: exactly the five schema keys, all strings, hash well formed.
pub fn parse_metadata(json: &str) -> Result<CertificateMetadata> {
    let value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| Error::schema("$", e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| Error::schema("$", "expected a JSON object"))?;

    if let Some(extra) = object.keys().find(|k| !METADATA_KEYS.contains(&k.as_str())) {
        return Err(Error::schema(extra.clone(), "unknown key"));
    }
    let field = |key: &str| -> Result<String> {
        match object.get(key) {
            None => Err(Error::schema(key, "missing key")),
            Some(serde_json::Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(Error::schema(key, "expected a string")),
        }
    };

    let metadata = CertificateMetadata {
        institution_name: field(KEY_INSTITUTION_NAME)?,
        degree_title: field(KEY_DEGREE_TITLE)?,
        degree_conferral_date: field(KEY_CONFERRAL_DATE)?,
        certificate_uri: field(KEY_CERTIFICATE_URI)?,
        hash_signature: field(KEY_HASH)?,
    };
    metadata.hash_signature.parse::<HashSignature>()?;
    Ok(metadata)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub key: &'static str,
    pub reason: String,
}

pub fn validate_metadata(metadata: &CertificateMetadata) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |key: &'static str, ok: bool, reason: &str| {
        if !ok {
            out.push(Violation {
                key,
                reason: reason.to_string(),
            });
        }
    };
    check(KEY_INSTITUTION_NAME, !metadata.institution_name.is_empty(), "must be non-empty");
    check(KEY_DEGREE_TITLE, !metadata.degree_title.is_empty(), "must be non-empty");
    check(
        KEY_CONFERRAL_DATE,
        is_iso_date(&metadata.degree_conferral_date),
        "must be a valid YYYY-MM-DD date",
    );
    check(KEY_CERTIFICATE_URI, !metadata.certificate_uri.is_empty(), "must be non-empty");
    check(
        KEY_HASH,
        is_lower_hex_digest(&metadata.hash_signature),
        "must be 64 lowercase hexadecimal characters",
    );
    out
}

/// `validate_metadata` folded into a `Result`, reporting the first violation.
pub fn ensure_valid_metadata(metadata: &CertificateMetadata) -> Result<()> {
    match validate_metadata(metadata).into_iter().next() {
        None => Ok(()),
        Some(v) => Err(Error::schema(v.key, v.reason)),
    }
}

pub fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit())
        && NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok()
}

fn is_lower_hex_digest(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|c| matches!(c, b'0'..=b'9' | b'a'..=b'f'))
}

fn require_non_empty(name: &str, value: &str) -> Result<()> {
    if value.is_empty() {
        Err(Error::InvalidInput(format!("{name} must be non-empty")))
    } else {
        Ok(())
    }
}
