//! HTTP front-end for an nftcert node.
//!
//! One process hosts both the chain front-end and the simulated payment
//! provider. Payment outcomes still cross the oracle boundary: `pay` and
//! `fail` enqueue an oracle message, which is relayed to the escrow before
//! the response is written, and a background sweep expires lapsed orders
//! and relays anything left in the queue.

mod error;
mod routes;

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use nftcert_core::{ApiConfig, CertSystem};
use parking_lot::RwLock;
use tokio::net::TcpListener;

pub use error::ApiError;
pub use routes::router;

/// Shared handle to the node. Every mutation goes through the write lock, so
/// the ledger keeps a single writer; reads proceed concurrently.
#[derive(Clone)]
pub struct AppState {
    system: Arc<RwLock<CertSystem>>,
}

impl AppState {
    pub fn new(system: CertSystem) -> Self {
        AppState {
            system: Arc::new(RwLock::new(system)),
        }
    }

    pub fn system(&self) -> &Arc<RwLock<CertSystem>> {
        &self.system
    }

    /// Expires due orders and relays queued oracle messages. Returns how
    /// many messages were delivered.
    pub fn sweep(&self) -> nftcert_core::Result<usize> {
        {
            let system = self.system.read();
            let now = system.now();
            let due = system
                .gateway()
                .orders()
                .any(|o| o.status == nftcert_core::OrderStatus::Pending && o.is_due(now));
            if !due && system.gateway().outbox().next().is_none() {
                return Ok(0);
            }
        }
        let mut system = self.system.write();
        let now = system.now();
        system.expire_orders(now)?;
        Ok(system.oracle_drain()?.len())
    }

    fn spawn_sweeper(&self, every: Duration) -> tokio::task::JoinHandle<()> {
        let state = self.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
            loop {
                tick.tick().await;
                match state.sweep() {
                    Ok(0) => {}
                    Ok(n) => tracing::info!(delivered = n, "oracle sweep"),
                    Err(e) => tracing::error!(error = %e, "oracle sweep failed"),
                }
            }
        })
    }
}

/// Opens the node described by `config`.
pub fn open_system(config: &ApiConfig) -> nftcert_core::Result<CertSystem> {
    config.validate()?;
    CertSystem::open(&config.data_dir, config.clock.build(), &config.base_url())
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    state: AppState,
    sweep_every: Duration,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweeper = state.spawn_sweeper(sweep_every);
    let app = router(state.clone());
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    sweeper.abort();
    if let Err(e) = state.system.read().sync() {
        tracing::error!(error = %e, "final sync failed");
    }
    result
}

/// Runs the service described by `config` until interrupted.
pub async fn serve(config: ApiConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let system = open_system(&config)?;
    let addr: SocketAddr = config.socket_addr()?;
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(%addr, data_dir = %config.data_dir.display(), "nftcert service listening");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    serve_on(listener, AppState::new(system), Duration::from_secs(1), shutdown).await?;
    Ok(())
}
