//! Seeded random operation sequences over a `CertSystem`.

use std::collections::{BTreeMap, BTreeSet};

use nftcert_core::{
    Backend, CertSystem, CertificateFields, Clock, Error, EscrowState, FixedClock, OracleMessage, OrderStatus,
    PersonalInfo, TokenId, WalletAddress,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_conferral, random_degree, random_personal, random_wallet, usd};

#[derive(Debug, Clone, Copy)]
pub struct ScenarioConfig {
    pub ops: usize,
    /// Queue every oracle message a second time before each drain, then
    /// replay the whole delivery log once more at the end.
    pub duplicate_deliveries: bool,
    pub allow_transfers: bool,
    pub check_invariants: bool,
}

impl ScenarioConfig {
    pub fn new(ops: usize) -> Self {
        ScenarioConfig {
            ops,
            duplicate_deliveries: false,
            allow_transfers: true,
            check_invariants: true,
        }
    }
}

#[derive(Debug, Default)]
pub struct ScenarioLog {
    pub institutions: Vec<(String, WalletAddress)>,
    pub students: Vec<WalletAddress>,
    pub personals: Vec<PersonalInfo>,
    /// Identity behind each issued token.
    pub holders: BTreeMap<TokenId, PersonalInfo>,
    pub delivered: Vec<OracleMessage>,
    pub paid_to: BTreeMap<String, WalletAddress>,
    pub transferred: BTreeSet<TokenId>,
    pub revoked: BTreeSet<TokenId>,
    pub rejected_mints: usize,
}

pub fn run(system: &mut CertSystem, clock: &FixedClock, rng: &mut ChaCha8Rng, cfg: ScenarioConfig) -> ScenarioLog {
    let mut log = ScenarioLog::default();
    for step in 0..cfg.ops {
        let roll = if log.institutions.is_empty() { 0 } else { rng.gen_range(0..100) };
        match roll {
            0..=4 => register(system, rng, &mut log),
            5..=29 => issue(system, rng, &mut log),
            30..=49 => pay(system, rng, &mut log),
            50..=57 => fail(system, rng),
            58..=65 => {
                clock.advance(rng.gen_range(0..4000));
                system.expire_orders(clock.now()).unwrap();
            }
            66..=80 => drain(system, cfg, &mut log),
            81..=88 => reorder(system, rng),
            89..=92 => revoke(system, rng, &mut log),
            93..=96 if cfg.allow_transfers => transfer(system, rng, &mut log),
            _ => forged_mint(system, rng, &mut log),
        }
        clock.advance(1);
        if cfg.check_invariants {
            check_invariants(system, &log).unwrap_or_else(|e| panic!("step {step}: {e}"));
        }
    }
    drain(system, cfg, &mut log);
    if cfg.duplicate_deliveries {
        for message in log.delivered.clone() {
            system.on_payment_result(&message).unwrap();
        }
    }
    if cfg.check_invariants {
        check_invariants(system, &log).unwrap();
        check_conservation(system).unwrap();
    }
    log
}

fn register(system: &mut CertSystem, rng: &mut ChaCha8Rng, log: &mut ScenarioLog) {
    let n = log.institutions.len() + 1;
    let name = format!("Institution {n}");
    let addr = random_wallet(rng);
    system
        .register_institution(&name, addr, &format!("https://inst-{n}.example/wallet"))
        .unwrap();
    log.institutions.push((name, addr));
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

fn issue(system: &mut CertSystem, rng: &mut ChaCha8Rng, log: &mut ScenarioLog) {
    let (name, addr) = pick(rng, &log.institutions).cloned().unwrap();
    let personal = random_personal(rng);
    let backend = if rng.gen_bool(0.8) {
        Backend::Mutable
    } else {
        Backend::ContentAddressed
    };
    let image = format!("image {}", rng.gen::<u64>());
    let uri = system.put_image(image.as_bytes(), "image/png", backend).unwrap();
    let fields = CertificateFields::new(name, random_degree(rng), random_conferral(rng), uri);
    let (token_id, order) = system
        .issue_certificate(addr, &personal, fields, usd("50.00"))
        .unwrap();
    assert_eq!(order.status, OrderStatus::Pending);
    assert!(system.owner_of(token_id).unwrap().is_zero());
    log.holders.insert(token_id, personal.clone());
    log.personals.push(personal);
}

fn pending_orders(system: &CertSystem) -> Vec<String> {
    system
        .gateway()
        .orders()
        .filter(|o| o.status == OrderStatus::Pending)
        .map(|o| o.order_id.clone())
        .collect()
}

fn pay(system: &mut CertSystem, rng: &mut ChaCha8Rng, log: &mut ScenarioLog) {
    let Some(order_id) = pick(rng, &pending_orders(system)).cloned() else {
        return;
    };
    let student = if log.students.is_empty() || rng.gen_bool(0.5) {
        let s = random_wallet(rng);
        log.students.push(s);
        s
    } else {
        *pick(rng, &log.students).unwrap()
    };
    match system.complete_payment(&order_id, student) {
        Ok(message) => {
            assert_eq!(message.payer_wallet, Some(student));
            log.paid_to.insert(order_id, student);
        }
        Err(Error::Expired(_)) => {}
        Err(e) => panic!("unexpected payment error: {e}"),
    }
}

fn fail(system: &mut CertSystem, rng: &mut ChaCha8Rng) {
    if let Some(order_id) = pick(rng, &pending_orders(system)).cloned() {
        system.fail_order(&order_id).unwrap();
    }
}

fn drain(system: &mut CertSystem, cfg: ScenarioConfig, log: &mut ScenarioLog) {
    if cfg.duplicate_deliveries {
        let queued: Vec<OracleMessage> = system.gateway().outbox().cloned().collect();
        for message in queued {
            system.redeliver(message).unwrap();
        }
    }
    let delivered = system.oracle_drain().unwrap();
    let mut seen = BTreeSet::new();
    for message in delivered {
        if seen.insert(message.delivery_id.clone()) {
            log.delivered.push(message);
        }
    }
}

fn reorder(system: &mut CertSystem, rng: &mut ChaCha8Rng) {
    let abandoned: Vec<TokenId> = system
        .state()
        .escrow
        .iter()
        .filter(|r| r.state == EscrowState::Abandoned)
        .map(|r| r.token_id)
        .collect();
    if let Some(&token_id) = pick(rng, &abandoned) {
        let order = system.create_order(token_id, usd("50.00")).unwrap();
        assert_eq!(order.token_id, token_id);
        assert_eq!(system.escrow_of(token_id).unwrap().state, EscrowState::AwaitingPayment);
    }
}

fn revoke(system: &mut CertSystem, rng: &mut ChaCha8Rng, log: &mut ScenarioLog) {
    let candidates: Vec<TokenId> = system
        .state()
        .tokens
        .iter()
        .filter(|t| Backend::of_uri(&t.metadata.certificate_uri) == Backend::Mutable)
        .map(|t| t.id)
        .collect();
    if let Some(&id) = pick(rng, &candidates) {
        system.revoke_certificate(id, b"REVOKED NOTICE").unwrap();
        log.revoked.insert(id);
    }
}

fn transfer(system: &mut CertSystem, rng: &mut ChaCha8Rng, log: &mut ScenarioLog) {
    let released: Vec<TokenId> = system
        .state()
        .escrow
        .iter()
        .filter(|r| r.state == EscrowState::Released)
        .map(|r| r.token_id)
        .collect();
    if let Some(&id) = pick(rng, &released) {
        let from = system.owner_of(id).unwrap();
        let to = random_wallet(rng);
        system.transfer(id, from, to).unwrap();
        log.transferred.insert(id);
    }
}

fn forged_mint(system: &mut CertSystem, rng: &mut ChaCha8Rng, log: &mut ScenarioLog) {
    let mill = random_wallet(rng);
    let personal = random_personal(rng);
    let fields = CertificateFields::new("Diploma Mill", "PhD", "2020-01-01", "https://mill.example/c.png");
    let before = system.ledger().len();
    let err = system
        .issue_certificate(mill, &personal, fields, usd("9.99"))
        .unwrap_err();
    assert!(matches!(err, Error::NotAccredited(_)), "{err}");
    assert_eq!(system.ledger().len(), before);
    log.rejected_mints += 1;
}

pub fn check_invariants(system: &CertSystem, log: &ScenarioLog) -> Result<(), String> {
    let state = system.state();
    for record in state.escrow.iter() {
        let token = state.tokens.get(record.token_id).map_err(|e| e.to_string())?;
        let held = matches!(record.state, EscrowState::AwaitingPayment | EscrowState::Abandoned);
        if held != token.owner.is_zero() {
            return Err(format!(
                "token {} is {:?} but owned by {}",
                token.id, record.state, token.owner
            ));
        }
        if record.state == EscrowState::Released && !log.transferred.contains(&token.id) {
            let payer = log.paid_to.get(&record.order_id);
            if payer != Some(&token.owner) {
                return Err(format!("token {} released to {} not payer {payer:?}", token.id, token.owner));
            }
        }
    }
    let mut owners = BTreeSet::new();
    for token in state.tokens.iter() {
        owners.insert(token.owner);
        let releases = token
            .history
            .iter()
            .filter(|h| h.from.is_zero() && !h.to.is_zero())
            .count();
        if releases > 1 {
            return Err(format!("token {} left escrow {releases} times", token.id));
        }
        if token.history[0].from != WalletAddress::ZERO || token.history[0].to != WalletAddress::ZERO {
            return Err(format!("token {} history does not start with a mint", token.id));
        }
        if token.history.windows(2).any(|w| w[0].to != w[1].from) {
            return Err(format!("token {} history does not chain", token.id));
        }
        if token.history.last().unwrap().to != token.owner {
            return Err(format!("token {} history disagrees with owner", token.id));
        }
        if log
            .institutions
            .iter()
            .all(|(_, addr)| *addr != token.creator)
        {
            return Err(format!("token {} has an unregistered creator", token.id));
        }
    }
    let total: usize = owners.iter().map(|o| state.tokens.tokens_of_wallet(o).len()).sum();
    if total != state.tokens.len() {
        return Err(format!("owner index covers {total} of {} tokens", state.tokens.len()));
    }
    let ids: Vec<u64> = state.tokens.iter().map(|t| t.id.0).collect();
    if ids != (1..=ids.len() as u64).collect::<Vec<_>>() {
        return Err("token ids are not dense".into());
    }
    let now = system.now();
    let mut live = BTreeMap::new();
    for order in system.gateway().orders() {
        if order.status == OrderStatus::Pending && !order.is_due(now) {
            *live.entry(order.token_id).or_insert(0) += 1;
        }
        if order.status.is_final() != order.resolved_at.is_some() {
            return Err(format!("order {} resolved_at disagrees with status", order.order_id));
        }
    }
    if let Some((token, n)) = live.iter().find(|(_, &n)| n > 1) {
        return Err(format!("token {token} has {n} live pending orders"));
    }
    Ok(())
}

/// Once the outbox is empty: tokens released == orders paid.
pub fn check_conservation(system: &CertSystem) -> Result<(), String> {
    let paid = system
        .gateway()
        .orders()
        .filter(|o| o.status == OrderStatus::Paid)
        .count();
    let released = system
        .state()
        .escrow
        .iter()
        .filter(|r| r.state == EscrowState::Released)
        .count();
    if paid != released {
        return Err(format!("{paid} paid orders but {released} releases"));
    }
    let paid_messages = system
        .state()
        .escrow
        .iter()
        .flat_map(|r| r.processed_delivery_ids.iter())
        .count();
    if paid_messages < released {
        return Err("release without a processed delivery".into());
    }
    Ok(())
}
