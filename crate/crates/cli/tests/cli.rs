use std::net::TcpListener as StdListener;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;
use std::time::Duration;

use nftcert_client::Client;
use nftcert_core::ledger::generate_keypair;
use nftcert_core::wire::{CreateOrder, FeeTerms, IssueCertificate, RegisterInstitution, VerifyRequest};
use nftcert_core::{Backend, CertSystem, FixedClock, OrderTerms, PersonalInfo, TokenId, Verdict, WalletAddress};
use nftcert_server::AppState;

const T0: i64 = 1_700_000_000;
const BASE: &str = "https://node.example";

/// Digest of the final chain state after `script`, pinned from the library
/// run; the CLI and HTTP client runs must land on exactly this state.
const SCRIPT_DIGEST: &str = "cd277c67d1f32a034903c4a680315d3fbce633b50670733777214b7b155f979a";

fn nftcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nftcert"))
        .args(args)
        .env_remove("NFTCERT_CONFIG")
        .env_remove("NFTCERT_SERVER")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn wallet(seed: u8) -> WalletAddress {
    generate_keypair(Some(&[seed; 32])).unwrap().address()
}

fn person(name: &str, dob: &str, place: &str, nat: &str) -> PersonalInfo {
    PersonalInfo::new(name, dob, place, nat).unwrap()
}

fn john() -> PersonalInfo {
    person("John", "1995-01-01", "Boston", "USA")
}
fn jane() -> PersonalInfo {
    person("Jane", "1996-02-03", "Lyon", "FRA")
}
fn alice() -> PersonalInfo {
    person("Alice", "1990-12-24", "Osaka", "JPN")
}

struct Node {
    url: String,
    state: AppState,
    stop: tokio::sync::oneshot::Sender<()>,
}

async fn start_node() -> Node {
    let clock = FixedClock::new(T0);
    let system = CertSystem::in_memory(Arc::new(clock), BASE);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let state = AppState::new(system);
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    tokio::spawn(nftcert_server::serve_on(listener, state.clone(), Duration::from_millis(50), async {
        let _ = stopped.await;
    }));
    Node { url, state, stop }
}

fn hex(digest: [u8; 32]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ----- the scripted scenario, once per surface -----

const IMG1: &[u8] = b"certificate image: john";
const IMG2: &[u8] = b"certificate image: jane";
const IMG3: &[u8] = b"certificate image: alice";

fn library_script() -> (String, Vec<Verdict>) {
    let mut s = CertSystem::in_memory(Arc::new(FixedClock::new(T0)), BASE);
    s.register_institution("University A", wallet(0xA1), "https://uni-a.example/wallet").unwrap();
    s.register_institution("College B", wallet(0xB2), "https://college-b.example/wallet").unwrap();
    let uri1 = s.put_image(IMG1, "image/png", Backend::Mutable).unwrap();
    let uri2 = s.put_image(IMG2, "image/png", Backend::ContentAddressed).unwrap();
    let uri3 = s.put_image(IMG3, "image/png", Backend::Mutable).unwrap();
    let usd = || OrderTerms::new("50.00".parse().unwrap(), "USD".parse().unwrap(), 86_400);
    let eur = || OrderTerms::new("30".parse().unwrap(), "EUR".parse().unwrap(), 86_400);
    let f = |inst: &str, deg: &str, uri: &str| {
        nftcert_core::CertificateFields::new(inst, deg, "2020-06-30", uri)
    };
    s.issue_certificate(wallet(0xA1), &john(), f("University A", "Bachelor of Science", &uri1), usd())
        .unwrap();
    s.issue_certificate(wallet(0xB2), &jane(), f("College B", "Certificate in Welding", &uri2), eur())
        .unwrap();
    s.issue_certificate(wallet(0xA1), &alice(), f("University A", "Master of Arts", &uri3), usd())
        .unwrap();
    s.complete_payment("ord-000001", wallet(0x51)).unwrap();
    s.oracle_drain().unwrap();
    s.fail_order("ord-000002").unwrap();
    s.oracle_drain().unwrap();
    s.create_order(TokenId(2), eur()).unwrap();
    s.complete_payment("ord-000004", wallet(0x52)).unwrap();
    s.oracle_drain().unwrap();
    s.complete_payment("ord-000003", wallet(0x51)).unwrap();
    s.oracle_drain().unwrap();
    s.revoke_certificate(TokenId(1), b"REVOKED").unwrap();
    let verdicts = vec![
        s.full_verification(&john(), TokenId(1), &wallet(0x51)).unwrap().overall,
        s.full_verification(&jane(), TokenId(2), &wallet(0x52)).unwrap().overall,
        s.full_verification(&alice(), TokenId(3), &wallet(0x51)).unwrap().overall,
    ];
    assert_eq!(s.tokens_of_wallet(&wallet(0x51)), vec![TokenId(1), TokenId(3)]);
    (hex(s.state_digest()), verdicts)
}

async fn client_script(url: &str) -> (String, Vec<Verdict>) {
    let c = Client::new(url);
    for (name, seed, uri) in [
        ("University A", 0xA1, "https://uni-a.example/wallet"),
        ("College B", 0xB2, "https://college-b.example/wallet"),
    ] {
        c.register_institution(&RegisterInstitution {
            name: name.into(),
            wallet: wallet(seed),
            published_uri: uri.into(),
        })
        .await
        .unwrap();
    }
    let uri1 = c.upload_image(IMG1.to_vec(), "image/png", Backend::Mutable).await.unwrap().uri;
    let uri2 = c
        .upload_image(IMG2.to_vec(), "image/png", Backend::ContentAddressed)
        .await
        .unwrap()
        .uri;
    let uri3 = c.upload_image(IMG3.to_vec(), "image/png", Backend::Mutable).await.unwrap().uri;
    let usd = || FeeTerms::new("50.00".parse().unwrap(), "USD".parse().unwrap());
    let eur = || FeeTerms::new("30".parse().unwrap(), "EUR".parse().unwrap());
    let req = |creator: u8, p: PersonalInfo, inst: &str, deg: &str, uri: &str, terms: FeeTerms| IssueCertificate {
        creator: wallet(creator),
        personal_info: p,
        institution_name: inst.into(),
        degree_title: deg.into(),
        degree_conferral_date: "2020-06-30".into(),
        certificate_uri: uri.into(),
        terms,
    };
    c.issue_certificate(&req(0xA1, john(), "University A", "Bachelor of Science", &uri1, usd()))
        .await
        .unwrap();
    c.issue_certificate(&req(0xB2, jane(), "College B", "Certificate in Welding", &uri2, eur()))
        .await
        .unwrap();
    c.issue_certificate(&req(0xA1, alice(), "University A", "Master of Arts", &uri3, usd()))
        .await
        .unwrap();
    c.pay("ord-000001", wallet(0x51)).await.unwrap();
    c.fail("ord-000002").await.unwrap();
    c.create_order(&CreateOrder {
        token_id: TokenId(2),
        terms: eur(),
    })
    .await
    .unwrap();
    c.pay("ord-000004", wallet(0x52)).await.unwrap();
    c.pay("ord-000003", wallet(0x51)).await.unwrap();
    c.revoke(TokenId(1), Some("REVOKED".into())).await.unwrap();
    let mut verdicts = Vec::new();
    for (id, p, w) in [(1, john(), 0x51), (2, jane(), 0x52), (3, alice(), 0x51)] {
        let r = c
            .verify(&VerifyRequest {
                token_id: TokenId(id),
                claimed_wallet: wallet(w),
                personal_info: p,
            })
            .await
            .unwrap();
        verdicts.push(r.overall);
    }
    (c.status().await.unwrap().state_digest, verdicts)
}

fn write_personal(dir: &Path, name: &str, p: &PersonalInfo) -> String {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string(p).unwrap()).unwrap();
    path.display().to_string()
}

fn cli_script(url: &str, dir: &Path) -> (String, Vec<i32>) {
    let run = |args: &[&str]| {
        let mut full = vec!["--server", url, "--json"];
        full.extend_from_slice(args);
        let o = nftcert(&full);
        assert!(
            o.status.code().unwrap() <= 2,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        o
    };
    let (a, b, s1, s2) = (
        wallet(0xA1).to_string(),
        wallet(0xB2).to_string(),
        wallet(0x51).to_string(),
        wallet(0x52).to_string(),
    );
    run(&["register", "--name", "University A", "--wallet", &a, "--published-uri", "https://uni-a.example/wallet"]);
    run(&["register", "--name", "College B", "--wallet", &b, "--published-uri", "https://college-b.example/wallet"]);
    let img1 = dir.join("img1.png");
    let img2 = dir.join("img2.png");
    std::fs::write(&img1, IMG1).unwrap();
    std::fs::write(&img2, IMG2).unwrap();
    let img3 = dir.join("img3.png");
    std::fs::write(&img3, IMG3).unwrap();
    let uri1 = json(&run(&["upload", "--file", img1.to_str().unwrap()]))["uri"].as_str().unwrap().to_string();
    let uri2 = json(&run(&["upload", "--file", img2.to_str().unwrap(), "--backend", "content-addressed"]))["uri"]
        .as_str()
        .unwrap()
        .to_string();
    let uri3 = json(&run(&["upload", "--file", img3.to_str().unwrap()]))["uri"].as_str().unwrap().to_string();
    let pj = write_personal(dir, "john", &john());
    let pn = write_personal(dir, "jane", &jane());
    let pa = write_personal(dir, "alice", &alice());
    let mint = |creator: &str, personal: &str, inst: &str, deg: &str, uri: &str, amount: &str, cur: &str| {
        let issued = json(&run(&[
            "mint", "--creator", creator, "--personal", personal, "--institution-name", inst, "--degree-title", deg,
            "--conferral-date", "2020-06-30", "--uri", uri, "--amount", amount, "--currency", cur,
        ]));
        assert_eq!(issued["order"]["status"], "pending");
    };
    mint(&a, &pj, "University A", "Bachelor of Science", &uri1, "50.00", "USD");
    mint(&b, &pn, "College B", "Certificate in Welding", &uri2, "30", "EUR");
    mint(&a, &pa, "University A", "Master of Arts", &uri3, "50.00", "USD");
    run(&["pay", "--order", "ord-000001", "--payer", &s1]);
    run(&["fail", "--order", "ord-000002"]);
    run(&["order", "--token", "2", "--amount", "30", "--currency", "EUR"]);
    run(&["pay", "--order", "ord-000004", "--payer", &s2]);
    run(&["pay", "--order", "ord-000003", "--payer", &s1]);
    let notice = dir.join("notice.txt");
    std::fs::write(&notice, "REVOKED").unwrap();
    run(&["revoke", "--token", "1", "--notice-file", notice.to_str().unwrap()]);
    let mut codes = Vec::new();
    for (id, p, w) in [("1", &pj, &s1), ("2", &pn, &s2), ("3", &pa, &s1)] {
        let o = run(&["verify", "--token", id, "--wallet", w, "--personal", p]);
        codes.push(o.status.code().unwrap());
    }
    let listing = json(&run(&["wallet", "--address", &s1]));
    assert_eq!(listing["tokens"], serde_json::json!([1, 3]));
    let status = json(&run(&["status"]));
    (status["state_digest"].as_str().unwrap().to_string(), codes)
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn cli_client_and_library_reach_the_same_state() {
    let (lib_digest, lib_verdicts) = library_script();
    assert_eq!(
        lib_verdicts,
        vec![Verdict::Rejected, Verdict::AuthenticWithCaveats, Verdict::Authentic]
    );
    assert_eq!(lib_digest, SCRIPT_DIGEST);

    let node = start_node().await;
    let (client_digest, client_verdicts) = client_script(&node.url).await;
    assert_eq!(client_verdicts, lib_verdicts);
    assert_eq!(client_digest, SCRIPT_DIGEST);
    let _ = node.stop.send(());

    let node = start_node().await;
    let dir = tempfile::tempdir().unwrap();
    let url = node.url.clone();
    let path = dir.path().to_path_buf();
    let (cli_digest, codes) = tokio::task::spawn_blocking(move || cli_script(&url, &path)).await.unwrap();
    assert_eq!(codes, vec![1, 2, 0]);
    assert_eq!(cli_digest, SCRIPT_DIGEST);
    assert!(node.state.system().read().validate_chain().is_valid());
    let _ = node.stop.send(());
}

#[test]
fn keygen_is_deterministic_with_a_seed() {
    let seed = "01".repeat(32);
    let o = nftcert(&["keygen", "--seed-hex", &seed, "--json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["address"], "0xaabe933be154a4b5094e1c4abf42866505f3c97e");
    assert_eq!(
        v["public_key"],
        "8a88e3dd7409f195fd52db2d3cba5d72ca6709bf1d94121bf3748801b40f6f5c"
    );
    assert!(v.get("seed_hex").is_none());
    let human = stdout(&nftcert(&["keygen", "--seed-hex", &seed]));
    assert!(human.contains("0xaabe933be154a4b5094e1c4abf42866505f3c97e"));

    let fresh = json(&nftcert(&["keygen", "--json"]));
    let again = json(&nftcert(&["keygen", "--json", "--seed-hex", fresh["seed_hex"].as_str().unwrap()]));
    assert_eq!(fresh["address"], again["address"]);
}

#[test]
fn usage_and_data_errors() {
    assert_eq!(nftcert(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(nftcert(&["keygen", "--seed-hex", "abcd"]).status.code(), Some(64));
    assert_eq!(nftcert(&["wallet", "--address", "0x12"]).status.code(), Some(64));
    assert_eq!(nftcert(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.json");
    let o = nftcert(&["--config", missing.to_str().unwrap(), "status"]);
    assert_eq!(o.status.code(), Some(64));

    // Nothing listens on a just-released port.
    let port = StdListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let o = nftcert(&["--server", &format!("http://127.0.0.1:{port}"), "status"]);
    assert_eq!(o.status.code(), Some(69));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn service_errors_are_data_errors() {
    let node = start_node().await;
    let url = node.url.clone();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    tokio::task::spawn_blocking(move || {
        let o = nftcert(&["--server", &url, "token", "--id", "9"]);
        assert_eq!(o.status.code(), Some(65));
        assert!(String::from_utf8_lossy(&o.stderr).contains("not_found"));

        let bad = path.join("bad.json");
        std::fs::write(&bad, r#"{"student_name": "X"}"#).unwrap();
        let w = wallet(1).to_string();
        let o = nftcert(&["--server", &url, "verify", "--token", "1", "--wallet", &w, "--personal", bad.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(65));
    })
    .await
    .unwrap();
    let _ = node.stop.send(());
}

#[test]
fn init_and_validate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("node.json");
    let data = dir.path().join("data");
    let cfg = config.to_str().unwrap();
    let o = nftcert(&["--config", cfg, "init", "--data-dir", data.to_str().unwrap(), "--bind", "127.0.0.1:18080"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(nftcert(&["--config", cfg, "init"]).status.code(), Some(64));

    let o = nftcert(&["--config", cfg, "validate-chain", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["status"], "valid");

    // Grow the chain, then corrupt block 2.
    {
        let mut s = CertSystem::open(&data, Arc::new(FixedClock::new(T0)), BASE).unwrap();
        for i in 0..4u8 {
            s.register_institution(&format!("Inst {i}"), wallet(i + 1), "https://x.example").unwrap();
        }
    }
    let chain = data.join("chain.bin");
    let mut bytes = std::fs::read(&chain).unwrap();
    let mut pos = 0;
    for _ in 0..2 {
        let len = u64::from_be_bytes(bytes[pos..pos + 8].try_into().unwrap()) as usize;
        pos += 8 + len + 32;
    }
    bytes[pos + 20] ^= 0x04;
    std::fs::write(&chain, &bytes).unwrap();

    let o = nftcert(&["--config", cfg, "validate-chain"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("first_bad_index") && text.contains('2'), "{text}");
    let o = nftcert(&["validate-chain", "--json", "--chain", chain.to_str().unwrap()]);
    assert_eq!(json(&o)["first_bad_index"], 2);
}

#[test]
fn serve_runs_the_configured_node() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("node.json");
    let cfg = config.to_str().unwrap();
    let port = StdListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let bind = format!("127.0.0.1:{port}");
    let data = dir.path().join("data");
    let o = nftcert(&[
        "--config", cfg, "init", "--data-dir", data.to_str().unwrap(), "--bind", &bind, "--fixed-clock", "1700000000",
    ]);
    assert!(o.status.success());

    let mut child = Command::new(env!("CARGO_BIN_EXE_nftcert"))
        .args(["--config", cfg, "serve"])
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let mut status = None;
    for _ in 0..100 {
        let o = nftcert(&["--config", cfg, "--json", "status"]);
        if o.status.success() {
            status = Some(json(&o));
            break;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    let a = wallet(0xA1).to_string();
    let registered = nftcert(&[
        "--config", cfg, "register", "--name", "University A", "--wallet", &a, "--published-uri", "https://u.example/w",
    ]);
    child.kill().unwrap();
    child.wait().unwrap();
    let status = status.expect("service came up");
    assert_eq!(status["blocks"], 1);
    assert_eq!(status["now"], 1_700_000_000);
    assert!(registered.status.success());
}
