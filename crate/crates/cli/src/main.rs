//! `nftcert` — operator command line.
//!
//! `keygen`, `init`, `validate-chain` and `serve` work on local files; every
//! other command talks to a running service over HTTP.

mod cli;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use nftcert_client::{Client, ClientError};
use nftcert_core::ledger::{generate_keypair, validate_chain_file, ValidationReport};
use nftcert_core::wire::{CreateOrder, FeeTerms, IssueCertificate, RegisterInstitution, VerifyRequest};
use nftcert_core::{ApiConfig, ClockMode, PersonalInfo};

use cli::{Cli, Command};
use output::Output;

/// Exit statuses, following the sysexits convention for failures.
mod exit {
    pub const REJECTED: u8 = 1;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const UNAVAILABLE: u8 = 69;
    pub const SOFTWARE: u8 = 70;
    pub const IO: u8 = 74;
}

/// A failure with the exit status it maps to.
#[derive(Debug)]
struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn new(status: u8, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        let status = match &e {
            ClientError::Api { status, .. } if *status >= 500 => exit::SOFTWARE,
            ClientError::Api { .. } => exit::DATA,
            ClientError::Transport(_) => exit::UNAVAILABLE,
            ClientError::Decode(_) => exit::SOFTWARE,
        };
        Failure::new(status, e.to_string())
    }
}

impl From<nftcert_core::Error> for Failure {
    fn from(e: nftcert_core::Error) -> Self {
        let status = match e {
            nftcert_core::Error::Io { .. } => exit::IO,
            nftcert_core::Error::IntegrityViolation(_) => exit::REJECTED,
            _ => exit::DATA,
        };
        Failure::new(status, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE),
            };
        }
    };
    let out = Output::new(cli.json);
    match run(cli, &out) {
        Ok(status) => ExitCode::from(status),
        Err(f) => {
            out.error(&f.message);
            ExitCode::from(f.status)
        }
    }
}

fn config_path(cli: &Cli) -> PathBuf {
    cli.config.clone().unwrap_or_else(|| PathBuf::from("nftcert.json"))
}

fn load_config(cli: &Cli) -> Result<ApiConfig, Failure> {
    let path = config_path(cli);
    if !path.exists() {
        return Err(Failure::new(
            exit::USAGE,
            format!("no config at {} (run `nftcert init` or pass --config)", path.display()),
        ));
    }
    ApiConfig::load(&path).map_err(|e| Failure::new(exit::USAGE, e.to_string()))
}

fn client(cli: &Cli) -> Result<Client, Failure> {
    if let Some(url) = &cli.server {
        return Ok(Client::new(url.clone()));
    }
    let config = load_config(cli)?;
    Ok(Client::new(format!("http://{}", config.bind_address)))
}

fn read_personal(path: &Path) -> Result<PersonalInfo, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(exit::DATA, format!("{}: {e}", path.display())))?;
    let personal: PersonalInfo = serde_json::from_str(&text)
        .map_err(|e| Failure::new(exit::DATA, format!("{}: {e}", path.display())))?;
    personal.validate()?;
    Ok(personal)
}

fn block_on<F: std::future::Future>(future: F) -> F::Output {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .expect("runtime starts")
        .block_on(future)
}

fn run(cli: Cli, out: &Output) -> Outcome {
    match &cli.command {
        Command::Keygen { seed_hex } => {
            let seed = match seed_hex {
                Some(hex_seed) => Some(
                    hex::decode(hex_seed)
                        .map_err(|e| Failure::new(exit::USAGE, format!("--seed-hex: {e}")))?,
                ),
                None => None,
            };
            let keys = generate_keypair(seed.as_deref()).map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
            out.keypair(&keys, seed.is_none());
            Ok(0)
        }
        Command::Init {
            data_dir,
            bind,
            fixed_clock,
            base_url,
            force,
        } => {
            let path = config_path(&cli);
            if path.exists() && !force {
                return Err(Failure::new(
                    exit::USAGE,
                    format!("{} already exists (use --force to overwrite)", path.display()),
                ));
            }
            let config = ApiConfig {
                bind_address: bind.clone(),
                data_dir: data_dir.clone(),
                clock: match fixed_clock {
                    Some(at) => ClockMode::Fixed { at: *at },
                    None => ClockMode::Real,
                },
                public_base_url: base_url.clone(),
            };
            config.validate().map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
            let system = nftcert_server::open_system(&config)?;
            system.sync()?;
            config.save(&path)?;
            out.init(&path, &config, system.ledger().len());
            Ok(0)
        }
        Command::ValidateChain { chain } => {
            let path = match chain {
                Some(p) => p.clone(),
                None => load_config(&cli)?.data_dir.join(nftcert_core::system::CHAIN_FILE),
            };
            let report = validate_chain_file(&path)?;
            out.validation(&report);
            Ok(match report {
                ValidationReport::Valid { .. } => 0,
                ValidationReport::Invalid { .. } => exit::REJECTED,
            })
        }
        Command::Serve => {
            let config = load_config(&cli)?;
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .with_writer(std::io::stderr)
                .init();
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(exit::SOFTWARE, e.to_string()))?;
            runtime
                .block_on(nftcert_server::serve(config))
                .map_err(|e| Failure::new(exit::UNAVAILABLE, e.to_string()))?;
            Ok(0)
        }
        _ => {
            let client = client(&cli)?;
            block_on(remote(&cli.command, &client, out))
        }
    }
}

async fn remote(command: &Command, c: &Client, out: &Output) -> Outcome {
    match command {
        Command::Status => out.status(&c.status().await?),
        Command::Register {
            name,
            wallet,
            published_uri,
        } => {
            let record = c
                .register_institution(&RegisterInstitution {
                    name: name.clone(),
                    wallet: *wallet,
                    published_uri: published_uri.clone(),
                })
                .await?;
            out.institution(&record);
        }
        Command::Institution { wallet } => out.institution(&c.institution(wallet).await?),
        Command::Upload {
            file,
            content_type,
            backend,
        } => {
            let bytes = std::fs::read(file).map_err(|e| Failure::new(exit::DATA, format!("{}: {e}", file.display())))?;
            out.stored(&c.upload_image(bytes, content_type, (*backend).into()).await?);
        }
        Command::Mint {
            creator,
            personal,
            institution_name,
            degree_title,
            conferral_date,
            uri,
            fee,
        } => {
            let req = IssueCertificate {
                creator: *creator,
                personal_info: read_personal(personal)?,
                institution_name: institution_name.clone(),
                degree_title: degree_title.clone(),
                degree_conferral_date: conferral_date.clone(),
                certificate_uri: uri.clone(),
                terms: fee.terms(),
            };
            out.issued(&c.issue_certificate(&req).await?);
        }
        Command::Order { token, fee } => {
            let view = c
                .create_order(&CreateOrder {
                    token_id: *token,
                    terms: fee.terms(),
                })
                .await?;
            out.order(&view);
        }
        Command::ShowOrder { order } => out.order(&c.order(order).await?),
        Command::Pay { order, payer } => out.order(&c.pay(order, *payer).await?),
        Command::Fail { order } => out.order(&c.fail(order).await?),
        Command::Token { id } => out.token(&c.token(*id).await?),
        Command::Wallet { address } => out.wallet(&c.wallet_tokens(address).await?),
        Command::Verify {
            token,
            wallet,
            personal,
        } => {
            let report = c
                .verify(&VerifyRequest {
                    token_id: *token,
                    claimed_wallet: *wallet,
                    personal_info: read_personal(personal)?,
                })
                .await?;
            out.report(&report);
            return Ok(report.exit_code() as u8);
        }
        Command::Revoke { token, notice_file } => {
            let notice = match notice_file {
                Some(path) => Some(
                    std::fs::read_to_string(path)
                        .map_err(|e| Failure::new(exit::DATA, format!("{}: {e}", path.display())))?,
                ),
                None => None,
            };
            out.revoked(&c.revoke(*token, notice).await?);
        }
        Command::Keygen { .. } | Command::Init { .. } | Command::ValidateChain { .. } | Command::Serve => {
            unreachable!("handled locally")
        }
    }
    Ok(0)
}

impl cli::Fee {
    fn terms(&self) -> FeeTerms {
        let mut terms = FeeTerms::new(self.amount, self.currency);
        terms.expiry_seconds = self.expiry_seconds;
        terms
    }
}
