#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use nftcert_client::Client;
use nftcert_core::ledger::generate_keypair;
use nftcert_core::wire::{FeeTerms, IssueCertificate, RegisterInstitution};
use nftcert_core::{CertSystem, FixedClock, PersonalInfo, WalletAddress};
use nftcert_server::AppState;
use tokio::sync::oneshot;

pub const T0: i64 = 1_700_000_000;

pub struct Node {
    pub client: Client,
    pub state: AppState,
    pub clock: FixedClock,
    stop: Option<oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl Node {
    pub async fn start(system: CertSystem, clock: FixedClock) -> Node {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let state = AppState::new(system);
        let (stop, stopped) = oneshot::channel::<()>();
        let task = tokio::spawn(nftcert_server::serve_on(
            listener,
            state.clone(),
            Duration::from_millis(50),
            async {
                let _ = stopped.await;
            },
        ));
        Node {
            client: Client::new(format!("http://{addr}")),
            state,
            clock,
            stop: Some(stop),
            task: Some(task),
        }
    }

    pub async fn in_memory() -> Node {
        let clock = FixedClock::new(T0);
        let system = CertSystem::in_memory(Arc::new(clock.clone()), "https://node.example");
        Node::start(system, clock).await
    }

    pub async fn on_disk(dir: &Path) -> Node {
        let clock = FixedClock::new(T0);
        let system = CertSystem::open(dir, Arc::new(clock.clone()), "https://node.example").unwrap();
        Node::start(system, clock).await
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.client.base_url())
    }

    pub async fn stop(mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(task) = self.task.take() {
            task.await.unwrap().unwrap();
        }
    }
}

pub fn wallet(seed: u8) -> WalletAddress {
    generate_keypair(Some(&[seed; 32])).unwrap().address()
}

pub fn john() -> PersonalInfo {
    PersonalInfo::new("John", "1995-01-01", "Boston", "USA").unwrap()
}

pub fn register_a() -> RegisterInstitution {
    RegisterInstitution {
        name: "University A".into(),
        wallet: wallet(0xA1),
        published_uri: "https://uni-a.example/wallet".into(),
    }
}

pub fn issue_john(uri: &str) -> IssueCertificate {
    IssueCertificate {
        creator: wallet(0xA1),
        personal_info: john(),
        institution_name: "University A".into(),
        degree_title: "Bachelor of Science".into(),
        degree_conferral_date: "2020-06-30".into(),
        certificate_uri: uri.into(),
        terms: FeeTerms::new("50.00".parse().unwrap(), "USD".parse().unwrap()),
    }
}

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
    haystack.windows(needle.len()).any(|w| w == needle.as_bytes())
}
