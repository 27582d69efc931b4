//! Simulated fiat payment gateway and the oracle outbox that relays order
//! outcomes to the escrow contract.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ledger::WalletAddress;
use crate::token::TokenId;

/// Exact fiat amount held as integer minor units (hundredths).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount {
    minor: u64,
}

impl Amount {
    pub fn from_minor(minor: u64) -> Result<Self> {
        if minor == 0 {
            return Err(Error::InvalidInput("amount must be positive".into()));
        }
        Ok(Amount { minor })
    }

    pub fn minor_units(&self) -> u64 {
        self.minor
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.minor / 100, self.minor % 100)
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Amount({self})")
    }
}

impl FromStr for Amount {
    type Err = Error;

    /// Accepts `123`, `123.4` or `123.45`; anything finer is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("`{s}` is not a decimal amount with at most 2 fraction digits"));
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if whole.is_empty()
            || !whole.bytes().all(|c| c.is_ascii_digit())
            || frac.len() > 2
            || !frac.bytes().all(|c| c.is_ascii_digit())
            || (s.contains('.') && frac.is_empty())
        {
            return Err(bad());
        }
        let whole: u64 = whole.parse().map_err(|_| bad())?;
        let frac: u64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<u64>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        let minor = whole
            .checked_mul(100)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(bad)?;
        Amount::from_minor(minor)
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

// ISO-4217 entries that are not spendable fiat: metals, funds, test codes.
const NON_FIAT: &[&str] = &[
    "XAG", "XAU", "XBA", "XBB", "XBC", "XBD", "XDR", "XPD", "XPT", "XSU", "XTS", "XUA", "XXX",
];

/// ISO-4217 fiat currency code.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Currency([u8; 3]);

impl Currency {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii")
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Currency({self})")
    }
}

impl FromStr for Currency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if iso_currency::Currency::from_code(s).is_none() || NON_FIAT.contains(&s) {
            return Err(Error::InvalidInput(format!("`{s}` is not an ISO-4217 fiat currency code")));
        }
        let mut code = [0u8; 3];
        code.copy_from_slice(s.as_bytes());
        Ok(Currency(code))
    }
}

impl Serialize for Currency {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Currency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderStatus {
    Pending,
    Paid,
    Failed,
    Expired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaymentOutcome {
    Paid,
    Failed,
    Expired,
}

impl OrderStatus {
    pub fn is_final(self) -> bool {
        self != OrderStatus::Pending
    }

    /// The only legal moves are out of `Pending`.
    pub fn can_transition(self, to: OrderStatus) -> bool {
        self == OrderStatus::Pending && to != OrderStatus::Pending
    }
}

impl From<PaymentOutcome> for OrderStatus {
    fn from(outcome: PaymentOutcome) -> Self {
        match outcome {
            PaymentOutcome::Paid => OrderStatus::Paid,
            PaymentOutcome::Failed => OrderStatus::Failed,
            PaymentOutcome::Expired => OrderStatus::Expired,
        }
    }
}

/// Fee terms attached to an escrowed mint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderTerms {
    pub amount: Amount,
    pub currency: Currency,
    pub expiry_seconds: u64,
    #[serde(default)]
    pub payer_hint: String,
}

impl OrderTerms {
    pub fn new(amount: Amount, currency: Currency, expiry_seconds: u64) -> Self {
        OrderTerms {
            amount,
            currency,
            expiry_seconds,
            payer_hint: String::new(),
        }
    }

    pub fn with_payer_hint(mut self, hint: impl Into<String>) -> Self {
        self.payer_hint = hint.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.expiry_seconds == 0 {
            return Err(Error::InvalidInput("expiry_seconds must be positive".into()));
        }
        if self.expiry_seconds > i64::MAX as u64 / 2 {
            return Err(Error::InvalidInput("expiry_seconds is out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaymentOrder {
    pub order_id: String,
    pub token_id: TokenId,
    pub payer_hint: String,
    pub amount: Amount,
    pub currency: Currency,
    pub status: OrderStatus,
    pub created_at: Timestamp,
    pub resolved_at: Option<Timestamp>,
    pub expiry_seconds: u64,
}

impl PaymentOrder {
    pub fn expires_at(&self) -> Timestamp {
        self.created_at.saturating_add(self.expiry_seconds as i64)
    }

    pub fn is_due(&self, now: Timestamp) -> bool {
        self.status == OrderStatus::Pending && self.expires_at() <= now
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMessage {
    pub order_id: String,
    pub outcome: PaymentOutcome,
    pub delivery_id: String,
    /// Destination wallet for escrow release; present only for `paid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payer_wallet: Option<WalletAddress>,
}

/// Journal events for gateway persistence.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum GatewayEvent {
    Order(PaymentOrder),
    Enqueued(OracleMessage),
    Requeued(OracleMessage),
    Delivered { delivery_id: String },
}

/// Order store plus the oracle outbox.
#[derive(Debug, Clone, Default)]
pub struct Gateway {
    orders: BTreeMap<String, PaymentOrder>,
    outbox: VecDeque<OracleMessage>,
    issued_deliveries: u64,
}

impl Gateway {
    pub fn replay(events: impl IntoIterator<Item = GatewayEvent>) -> Self {
        let mut gateway = Gateway::default();
        for event in events {
            gateway.apply(event);
        }
        gateway
    }

    fn apply(&mut self, event: GatewayEvent) {
        match event {
            GatewayEvent::Order(order) => {
                self.orders.insert(order.order_id.clone(), order);
            }
            GatewayEvent::Enqueued(msg) => {
                self.issued_deliveries += 1;
                self.outbox.push_back(msg);
            }
            GatewayEvent::Requeued(msg) => self.outbox.push_back(msg),
            GatewayEvent::Delivered { delivery_id } => {
                self.outbox.retain(|m| m.delivery_id != delivery_id);
            }
        }
    }

    pub fn get(&self, order_id: &str) -> Result<&PaymentOrder> {
        self.orders
            .get(order_id)
            .ok_or_else(|| Error::not_found("order", order_id))
    }

    pub fn orders(&self) -> impl Iterator<Item = &PaymentOrder> {
        self.orders.values()
    }

    pub fn contains(&self, order_id: &str) -> bool {
        self.orders.contains_key(order_id)
    }

    pub fn pending_for_token(&self, token_id: TokenId) -> Option<&PaymentOrder> {
        self.orders
            .values()
            .find(|o| o.token_id == token_id && o.status == OrderStatus::Pending)
    }

    pub fn outbox(&self) -> impl Iterator<Item = &OracleMessage> {
        self.outbox.iter()
    }

    pub fn next_order_id(&self) -> String {
        format!("ord-{:06}", self.orders.len() + 1)
    }

    fn next_delivery_id(&self) -> String {
        format!("dlv-{:06}", self.issued_deliveries + 1)
    }

    /// Builds a pending order without recording it.
    pub fn prepare_order(&self, token_id: TokenId, terms: &OrderTerms, now: Timestamp) -> Result<PaymentOrder> {
        terms.validate()?;
        if let Some(existing) = self.pending_for_token(token_id) {
            if !existing.is_due(now) {
                return Err(Error::Conflict(format!(
                    "token {token_id} already has pending order {}",
                    existing.order_id
                )));
            }
        }
        Ok(PaymentOrder {
            order_id: self.next_order_id(),
            token_id,
            payer_hint: terms.payer_hint.clone(),
            amount: terms.amount,
            currency: terms.currency,
            status: OrderStatus::Pending,
            created_at: now,
            resolved_at: None,
            expiry_seconds: terms.expiry_seconds,
        })
    }

    /// Records an order, returning the journal event.
    pub fn insert(&mut self, order: PaymentOrder) -> GatewayEvent {
        let event = GatewayEvent::Order(order);
        self.apply(event.clone());
        event
    }

    /// Resolves a pending order and queues the oracle message.
    fn resolve(
        &mut self,
        order_id: &str,
        outcome: PaymentOutcome,
        payer_wallet: Option<WalletAddress>,
        now: Timestamp,
    ) -> Result<(OracleMessage, Vec<GatewayEvent>)> {
        let order = self.get(order_id)?;
        let to = OrderStatus::from(outcome);
        if !order.status.can_transition(to) {
            return Err(Error::InvalidState(format!(
                "order {order_id} is already {:?}",
                order.status
            )));
        }
        let mut updated = order.clone();
        updated.status = to;
        updated.resolved_at = Some(now);
        let message = OracleMessage {
            order_id: order_id.to_string(),
            outcome,
            delivery_id: self.next_delivery_id(),
            payer_wallet,
        };
        let events = vec![
            GatewayEvent::Order(updated),
            GatewayEvent::Enqueued(message.clone()),
        ];
        for e in events.iter().cloned() {
            self.apply(e);
        }
        Ok((message, events))
    }

    /// Payment completion by the student. An order past its window is
    /// expired on the spot and the call fails with `Expired`.
    pub fn complete(
        &mut self,
        order_id: &str,
        payer: WalletAddress,
        now: Timestamp,
    ) -> Result<(OracleMessage, Vec<GatewayEvent>), (Error, Vec<GatewayEvent>)> {
        let order = self.get(order_id).map_err(|e| (e, vec![]))?;
        if order.is_due(now) {
            let (_, events) = self.expire(order_id, now).map_err(|e| (e, vec![]))?;
            return Err((Error::Expired(order_id.to_string()), events));
        }
        if payer.is_zero() {
            return Err((
                Error::InvalidInput("payer wallet cannot be the zero address".into()),
                vec![],
            ));
        }
        self.resolve(order_id, PaymentOutcome::Paid, Some(payer), now)
            .map_err(|e| (e, vec![]))
    }

    pub fn expire(&mut self, order_id: &str, now: Timestamp) -> Result<(OracleMessage, Vec<GatewayEvent>)> {
        self.resolve(order_id, PaymentOutcome::Expired, None, now)
    }

    pub fn fail(&mut self, order_id: &str, now: Timestamp) -> Result<(OracleMessage, Vec<GatewayEvent>)> {
        self.resolve(order_id, PaymentOutcome::Failed, None, now)
    }

    /// Expires every pending order whose window has closed at `now`.
    pub fn expire_due(&mut self, now: Timestamp) -> (Vec<String>, Vec<GatewayEvent>) {
        let due: Vec<String> = self
            .orders
            .values()
            .filter(|o| o.is_due(now))
            .map(|o| o.order_id.clone())
            .collect();
        let mut events = Vec::new();
        for id in &due {
            let (_, mut ev) = self.expire(id, now).expect("due orders are pending");
            events.append(&mut ev);
        }
        (due, events)
    }

    /// Re-queues a message, e.g. a redelivery from an at-least-once relay.
    pub fn enqueue(&mut self, message: OracleMessage) -> GatewayEvent {
        let event = GatewayEvent::Requeued(message);
        self.apply(event.clone());
        event
    }

    pub fn take_outbox(&mut self) -> Vec<OracleMessage> {
        self.outbox.drain(..).collect()
    }
}
