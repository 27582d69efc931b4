//! Certificate verification from resume data plus public chain state.
//!
//! Five checks feed the report. Any `fail` rejects the certificate; a
//! `caveat` (image store unreachable, or a content-addressed image whose
//! bytes the signature does not bind) downgrades an otherwise clean report
//! to `authentic-with-caveats`.

use serde::{Deserialize, Serialize};

use crate::certificate::{compute_signature, PersonalInfo};
use crate::error::Error;
use crate::ledger::{PublishedDirectory, Registry, WalletAddress};
use crate::storage::{Backend, Storage};
use crate::token::{NftToken, TokenId};

pub const CAVEAT_IMAGE_NOT_HASH_BOUND: &str = "image not hash-bound";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckOutcome {
    Pass,
    Fail,
    Caveat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Authentic,
    Rejected,
    AuthenticWithCaveats,
}

/// One value per verification check, in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks<T> {
    pub signature_match: T,
    pub issuer_accredited: T,
    pub issuer_matches_published: T,
    pub owner_matches_claimed: T,
    pub not_revoked: T,
}

impl<T> Checks<T> {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &T)> {
        [
            ("signature_match", &self.signature_match),
            ("issuer_accredited", &self.issuer_accredited),
            ("issuer_matches_published", &self.issuer_matches_published),
            ("owner_matches_claimed", &self.owner_matches_claimed),
            ("not_revoked", &self.not_revoked),
        ]
        .into_iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub token_id: TokenId,
    pub checks: Checks<CheckOutcome>,
    pub overall: Verdict,
    pub details: Checks<String>,
}

impl VerificationReport {
    /// CLI exit code: 0 authentic, 1 rejected, 2 authentic with caveats.
    pub fn exit_code(&self) -> i32 {
        match self.overall {
            Verdict::Authentic => 0,
            Verdict::Rejected => 1,
            Verdict::AuthenticWithCaveats => 2,
        }
    }
}

pub fn aggregate(checks: &Checks<CheckOutcome>) -> Verdict {
    let outcomes: Vec<CheckOutcome> = checks.iter().map(|(_, o)| *o).collect();
    if outcomes.contains(&CheckOutcome::Fail) {
        Verdict::Rejected
    } else if outcomes.contains(&CheckOutcome::Caveat) {
        Verdict::AuthenticWithCaveats
    } else {
        Verdict::Authentic
    }
}

fn pass_if(ok: bool) -> CheckOutcome {
    if ok {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail
    }
}

/// Recomputes the signature from the supplied identity and the token's
/// public fields and compares it with the stored one.
pub fn verify_signature(personal: &PersonalInfo, token: &NftToken) -> CheckOutcome {
    match compute_signature(personal, &token.metadata.fields()) {
        Ok(sig) => pass_if(sig.to_hex() == token.metadata.hash_signature),
        Err(_) => CheckOutcome::Fail,
    }
}

pub fn verify_accreditation(registry: &Registry, token: &NftToken) -> CheckOutcome {
    pass_if(registry.is_accredited(&token.creator))
}

/// Compares the creator with the wallet the institution announces on its
/// published channel.
pub fn verify_publication(registry: &Registry, published: &PublishedDirectory, token: &NftToken) -> CheckOutcome {
    let announced = registry
        .lookup(&token.creator)
        .and_then(|record| published.resolve(&record.published_uri));
    pass_if(announced == Some(token.creator))
}

pub fn verify_issuer(registry: &Registry, published: &PublishedDirectory, token: &NftToken) -> CheckOutcome {
    if verify_accreditation(registry, token) == CheckOutcome::Pass
        && verify_publication(registry, published, token) == CheckOutcome::Pass
    {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail
    }
}

pub fn verify_ownership(token: &NftToken, claimed: &WalletAddress) -> CheckOutcome {
    pass_if(!claimed.is_zero() && token.owner == *claimed)
}

pub fn check_revocation(images: &Storage, token: &NftToken) -> (CheckOutcome, String) {
    let uri = &token.metadata.certificate_uri;
    match images.is_revoked(uri) {
        Ok(true) => (CheckOutcome::Fail, format!("{uri} has been replaced by a revocation notice")),
        Ok(false) if Backend::of_uri(uri) == Backend::ContentAddressed => (
            CheckOutcome::Caveat,
            format!("{CAVEAT_IMAGE_NOT_HASH_BOUND}: content-addressed images cannot carry a revocation"),
        ),
        Ok(false) => (CheckOutcome::Pass, format!("{uri} is not revoked")),
        Err(Error::StoreUnavailable) => (
            CheckOutcome::Caveat,
            "image store unreachable; revocation status unknown".to_string(),
        ),
        Err(e) => (CheckOutcome::Fail, format!("certificate image unavailable: {e}")),
    }
}

pub struct VerificationInputs<'a> {
    pub registry: &'a Registry,
    pub published: &'a PublishedDirectory,
    pub images: &'a Storage,
}

pub fn full_verification(
    inputs: &VerificationInputs<'_>,
    personal: &PersonalInfo,
    token: &NftToken,
    claimed_wallet: &WalletAddress,
) -> VerificationReport {
    let signature = verify_signature(personal, token);
    let accredited = verify_accreditation(inputs.registry, token);
    let published = verify_publication(inputs.registry, inputs.published, token);
    let owner = verify_ownership(token, claimed_wallet);
    let (revocation, revocation_detail) = check_revocation(inputs.images, token);

    let checks = Checks {
        signature_match: signature,
        issuer_accredited: accredited,
        issuer_matches_published: published,
        owner_matches_claimed: owner,
        not_revoked: revocation,
    };
    let details = Checks {
        signature_match: match signature {
            CheckOutcome::Pass => "recomputed SHA-256 matches the on-chain hash".to_string(),
            _ => "recomputed SHA-256 differs from the on-chain hash".to_string(),
        },
        issuer_accredited: match accredited {
            CheckOutcome::Pass => format!("creator {} is an accredited institution", token.creator),
            _ => format!("creator {} is not in the accreditation registry", token.creator),
        },
        issuer_matches_published: match published {
            CheckOutcome::Pass => "creator matches the wallet on the institution's published channel".to_string(),
            _ => "creator does not match any published institution wallet".to_string(),
        },
        owner_matches_claimed: match owner {
            CheckOutcome::Pass => format!("token is held by {claimed_wallet}"),
            _ => format!("token is held by {}, not {claimed_wallet}", token.owner),
        },
        not_revoked: revocation_detail,
    };
    VerificationReport {
        token_id: token.id,
        overall: aggregate(&checks),
        checks,
        details,
    }
}
