use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clock::{Clock, FixedClock, SystemClock, Timestamp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ClockMode {
    Real,
    Fixed { at: Timestamp },
}

impl ClockMode {
    pub fn build(&self) -> Arc<dyn Clock> {
        match self {
            ClockMode::Real => Arc::new(SystemClock),
            ClockMode::Fixed { at } => Arc::new(FixedClock::new(*at)),
        }
    }
}

/// Service and CLI configuration, read from a JSON file:
///
/// ```json
/// {
///   "bind_address": "127.0.0.1:8080",
///   "data_dir": "./nftcert-data",
///   "clock": { "mode": "real" },
///   "public_base_url": "http://127.0.0.1:8080"
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiConfig {
    pub bind_address: String,
    pub data_dir: PathBuf,
    #[serde(default = "default_clock")]
    pub clock: ClockMode,
    /// Base of mutable certificate image URIs. Defaults to `http://{bind_address}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_base_url: Option<String>,
}

fn default_clock() -> ClockMode {
    ClockMode::Real
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            bind_address: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("nftcert-data"),
            clock: ClockMode::Real,
            public_base_url: None,
        }
    }
}

impl ApiConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ApiConfig =
            serde_json::from_str(&text).map_err(|e| Error::Codec(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn socket_addr(&self) -> Result<SocketAddr> {
        let addr: SocketAddr = self
            .bind_address
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bind_address `{}`: {e}", self.bind_address)))?;
        Ok(addr)
    }

    pub fn validate(&self) -> Result<()> {
        let addr = self.socket_addr()?;
        if addr.port() == 0 {
            return Err(Error::InvalidInput("port must be in 1-65535".into()));
        }
        if self.data_dir.as_os_str().is_empty() {
            return Err(Error::InvalidInput("data_dir must be set".into()));
        }
        Ok(())
    }

    pub fn base_url(&self) -> String {
        self.public_base_url
            .clone()
            .unwrap_or_else(|| format!("http://{}", self.bind_address))
    }
}
