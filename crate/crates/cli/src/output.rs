use std::path::Path;

use nftcert_core::verify::CheckOutcome;
use nftcert_core::wire::{IssuedCertificate, OrderView, Revoked, Status, StoredImage, WalletTokens};
use nftcert_core::{ApiConfig, InstitutionRecord, KeyPair, NftToken, ValidationReport, VerificationReport};
use serde::Serialize;
use serde_json::json;

pub struct Output {
    json: bool,
}

impl Output {
    pub fn new(json: bool) -> Self {
        Output { json }
    }

    fn emit<T: Serialize>(&self, value: &T, table: &[(&str, String)]) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
        } else {
            let width = table.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (key, value) in table {
                println!("{key:<width$}  {value}");
            }
        }
    }

    pub fn error(&self, message: &str) {
        if self.json {
            eprintln!("{}", json!({ "error": message }));
        } else {
            eprintln!("error: {message}");
        }
    }

    pub fn keypair(&self, keys: &KeyPair, show_secret: bool) {
        let mut value = json!({
            "address": keys.address().to_string(),
            "public_key": hex::encode(keys.public_key()),
        });
        let mut table = vec![
            ("address", keys.address().to_string()),
            ("public_key", hex::encode(keys.public_key())),
        ];
        // A seeded key can be re-derived; only a fresh one needs its secret shown.
        if show_secret {
            value["seed_hex"] = json!(hex::encode(keys.private_key()));
            table.push(("seed_hex", hex::encode(keys.private_key())));
        }
        self.emit(&value, &table);
    }

    pub fn init(&self, path: &Path, config: &ApiConfig, blocks: usize) {
        let value = json!({ "config": path, "settings": config, "blocks": blocks });
        self.emit(
            &value,
            &[
                ("config", path.display().to_string()),
                ("data_dir", config.data_dir.display().to_string()),
                ("bind_address", config.bind_address.clone()),
                ("blocks", blocks.to_string()),
            ],
        );
    }

    pub fn validation(&self, report: &ValidationReport) {
        let table = match report {
            ValidationReport::Valid { blocks } => vec![("status", "valid".to_string()), ("blocks", blocks.to_string())],
            ValidationReport::Invalid {
                first_bad_index,
                reason,
            } => vec![
                ("status", "invalid".to_string()),
                ("first_bad_index", first_bad_index.to_string()),
                ("reason", reason.clone()),
            ],
        };
        self.emit(report, &table);
    }

    pub fn status(&self, status: &Status) {
        self.emit(
            status,
            &[
                ("blocks", status.blocks.to_string()),
                ("head_hash", status.head_hash.clone()),
                ("state_digest", status.state_digest.clone()),
                ("now", status.now.to_string()),
            ],
        );
    }

    pub fn institution(&self, record: &InstitutionRecord) {
        self.emit(
            record,
            &[
                ("name", record.name.clone()),
                ("wallet", record.wallet.to_string()),
                ("published_uri", record.published_uri.clone()),
                ("registered_at", record.registered_at.to_string()),
            ],
        );
    }

    pub fn stored(&self, image: &StoredImage) {
        self.emit(image, &[("uri", image.uri.clone())]);
    }

    fn order_rows(view: &OrderView) -> Vec<(&'static str, String)> {
        let o = &view.order;
        vec![
            ("order_id", o.order_id.clone()),
            ("token_id", o.token_id.to_string()),
            ("status", format!("{:?}", o.status).to_lowercase()),
            ("amount", format!("{} {}", o.amount, o.currency.as_str())),
            ("expires_at", o.expires_at().to_string()),
            (
                "escrow",
                view.escrow_state
                    .map(|s| serde_json::to_value(s).unwrap().as_str().unwrap().to_string())
                    .unwrap_or_else(|| "-".into()),
            ),
        ]
    }

    pub fn issued(&self, issued: &IssuedCertificate) {
        let view = OrderView {
            order: issued.order.clone(),
            escrow_state: None,
        };
        let mut rows = Self::order_rows(&view);
        rows.pop();
        self.emit(issued, &rows);
    }

    pub fn order(&self, view: &OrderView) {
        self.emit(view, &Self::order_rows(view));
    }

    pub fn token(&self, token: &NftToken) {
        let m = &token.metadata;
        let mut rows = vec![
            ("id", token.id.to_string()),
            ("creator", token.creator.to_string()),
            ("owner", token.owner.to_string()),
            ("institution", m.institution_name.clone()),
            ("degree", m.degree_title.clone()),
            ("conferred", m.degree_conferral_date.clone()),
            ("certificate_uri", m.certificate_uri.clone()),
            ("hash", m.hash_signature.clone()),
        ];
        for h in &token.history {
            rows.push(("transfer", format!("{} -> {} (block {})", h.from, h.to, h.block_index)));
        }
        self.emit(token, &rows);
    }

    pub fn wallet(&self, tokens: &WalletTokens) {
        let list = tokens.tokens.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ");
        self.emit(
            tokens,
            &[
                ("wallet", tokens.wallet.to_string()),
                ("tokens", if list.is_empty() { "-".into() } else { list }),
            ],
        );
    }

    pub fn report(&self, report: &VerificationReport) {
        let mark = |o: &CheckOutcome| match o {
            CheckOutcome::Pass => "pass",
            CheckOutcome::Fail => "FAIL",
            CheckOutcome::Caveat => "caveat",
        };
        let details = report.details.iter().map(|(_, d)| d.clone()).collect::<Vec<_>>();
        let mut rows: Vec<(&str, String)> = report
            .checks
            .iter()
            .zip(details)
            .map(|((name, outcome), detail)| (name, format!("{:<6}  {detail}", mark(outcome))))
            .collect();
        rows.insert(0, ("token", report.token_id.to_string()));
        rows.push((
            "overall",
            serde_json::to_value(report.overall).unwrap().as_str().unwrap().to_string(),
        ));
        self.emit(report, &rows);
    }

    pub fn revoked(&self, revoked: &Revoked) {
        self.emit(
            revoked,
            &[("token_id", revoked.token_id.to_string()), ("uri", revoked.uri.clone()), ("revoked", "yes".into())],
        );
    }
}
