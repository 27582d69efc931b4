use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nftcert_core::wire::DEFAULT_EXPIRY_SECONDS;
use nftcert_core::{Amount, Backend, Currency, TokenId, WalletAddress};

#[derive(Debug, Parser)]
#[command(name = "nftcert", version, about = "Issue, pay for, and verify certificate tokens")]
pub struct Cli {
    /// Config file (JSON). Defaults to ./nftcert.json.
    #[arg(long, global = true, env = "NFTCERT_CONFIG")]
    pub config: Option<PathBuf>,

    /// Service URL; overrides the config's bind address.
    #[arg(long, global = true, env = "NFTCERT_SERVER")]
    pub server: Option<String>,

    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

fn token_id(raw: &str) -> Result<TokenId, String> {
    raw.parse::<u64>()
        .map(TokenId)
        .map_err(|_| format!("`{raw}` is not a token id"))
}

#[derive(Debug, Args)]
pub struct Fee {
    /// Fee in the currency's major unit, e.g. 50.00
    #[arg(long)]
    pub amount: Amount,
    /// ISO 4217 code, e.g. USD
    #[arg(long)]
    pub currency: Currency,
    #[arg(long, default_value_t = DEFAULT_EXPIRY_SECONDS)]
    pub expiry_seconds: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Mutable,
    ContentAddressed,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Mutable => Backend::Mutable,
            BackendArg::ContentAddressed => Backend::ContentAddressed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a config file and create the data directory with its genesis block.
    Init {
        #[arg(long, default_value = "nftcert-data")]
        data_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Freeze the node clock at this Unix time (for reproducible runs).
        #[arg(long)]
        fixed_clock: Option<i64>,
        /// Public base of certificate image URIs (default http://<bind>).
        #[arg(long)]
        base_url: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Generate a wallet key pair; deterministic when a seed is given.
    Keygen {
        /// 32-byte seed as 64 hex characters.
        #[arg(long)]
        seed_hex: Option<String>,
    },
    /// Run the HTTP service described by the config.
    Serve,
    /// Show chain height, head hash and state digest.
    Status,
    /// Accredit an institution wallet.
    Register {
        #[arg(long)]
        name: String,
        #[arg(long)]
        wallet: WalletAddress,
        /// Where the institution publishes its wallet address.
        #[arg(long)]
        published_uri: String,
    },
    /// Look up an accredited institution.
    Institution {
        #[arg(long)]
        wallet: WalletAddress,
    },
    /// Store a certificate image and print its URI.
    Upload {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value = "image/png")]
        content_type: String,
        #[arg(long, value_enum, default_value_t = BackendArg::Mutable)]
        backend: BackendArg,
    },
    /// Mint a certificate into escrow and open its payment order.
    Mint {
        #[arg(long)]
        creator: WalletAddress,
        /// JSON file with student_name, date_of_birth, birthplace, nationality.
        #[arg(long)]
        personal: PathBuf,
        #[arg(long)]
        institution_name: String,
        #[arg(long)]
        degree_title: String,
        /// YYYY-MM-DD
        #[arg(long)]
        conferral_date: String,
        #[arg(long)]
        uri: String,
        #[command(flatten)]
        fee: Fee,
    },
    /// Open a new order for an escrowed token whose previous order lapsed.
    Order {
        #[arg(long, value_parser = token_id)]
        token: TokenId,
        #[command(flatten)]
        fee: Fee,
    },
    /// Show a payment order.
    ShowOrder {
        #[arg(long)]
        order: String,
    },
    /// Settle an order as paid by a wallet; the token is released to it.
    Pay {
        #[arg(long)]
        order: String,
        #[arg(long)]
        payer: WalletAddress,
    },
    /// Mark an order as failed.
    Fail {
        #[arg(long)]
        order: String,
    },
    /// Show a token with its metadata and transfer history.
    Token {
        #[arg(long, value_parser = token_id)]
        id: TokenId,
    },
    /// List the tokens a wallet holds.
    Wallet {
        #[arg(long)]
        address: WalletAddress,
    },
    /// Verify a certificate claim. Exit 0 authentic, 1 rejected, 2 authentic with caveats.
    Verify {
        #[arg(long, value_parser = token_id)]
        token: TokenId,
        /// Wallet the holder claims to own.
        #[arg(long)]
        wallet: WalletAddress,
        /// JSON file with the holder's personal information.
        #[arg(long)]
        personal: PathBuf,
    },
    /// Replace a certificate's image with a revocation notice.
    Revoke {
        #[arg(long, value_parser = token_id)]
        token: TokenId,
        #[arg(long)]
        notice_file: Option<PathBuf>,
    },
    /// Check the hash chain file. Exits 1 and reports the first bad block if tampered.
    ValidateChain {
        /// Chain file; defaults to <data_dir>/chain.bin from the config.
        #[arg(long)]
        chain: Option<PathBuf>,
    },
}
