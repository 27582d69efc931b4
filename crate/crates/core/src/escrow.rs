//! The escrow contract: freshly minted tokens sit at the zero address until
//! the oracle reports a successful payment, then move to the payer's wallet.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::WalletAddress;
use crate::payment::{OracleMessage, PaymentOutcome};
use crate::token::{TokenBook, TokenId};
use crate::transition::Transition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EscrowState {
    AwaitingPayment,
    Released,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscrowRecord {
    pub token_id: TokenId,
    /// The order currently backing this escrow.
    pub order_id: String,
    pub state: EscrowState,
    pub processed_delivery_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscrowBook {
    records: BTreeMap<TokenId, EscrowRecord>,
    /// Every order ever opened, including superseded ones.
    orders: BTreeMap<String, TokenId>,
}

impl EscrowBook {
    pub fn get(&self, token_id: TokenId) -> Option<&EscrowRecord> {
        self.records.get(&token_id)
    }

    pub fn by_order(&self, order_id: &str) -> Result<&EscrowRecord> {
        self.orders
            .get(order_id)
            .and_then(|id| self.records.get(id))
            .ok_or_else(|| Error::not_found("escrow order", order_id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &EscrowRecord> {
        self.records.values()
    }

    pub fn pending(&self) -> Vec<EscrowRecord> {
        self.records
            .values()
            .filter(|r| r.state == EscrowState::AwaitingPayment)
            .cloned()
            .collect()
    }

    /// A token may be (re)offered for payment when it sits at the zero
    /// address and no escrow has released it.
    pub fn check_open(&self, token_id: TokenId, tokens: &TokenBook) -> Result<()> {
        let owner = tokens.owner_of(token_id)?;
        if !owner.is_zero() {
            return Err(Error::InvalidState(format!(
                "token {token_id} is owned by {owner}, not held in escrow"
            )));
        }
        if let Some(r) = self.records.get(&token_id) {
            if r.state == EscrowState::Released {
                return Err(Error::InvalidState(format!("token {token_id} was already released")));
            }
        }
        Ok(())
    }

    /// Decides what an oracle delivery does. `Ok(None)` means no-op: the
    /// delivery id was already processed, or the message refers to an order
    /// that has since been superseded by a newer one.
    pub fn plan_payment_result(&self, message: &OracleMessage) -> Result<Option<Vec<Transition>>> {
        let record = self.by_order(&message.order_id)?;
        if record.processed_delivery_ids.contains(&message.delivery_id)
            || record.order_id != message.order_id
            || record.state != EscrowState::AwaitingPayment
        {
            return Ok(None);
        }
        let settled = Transition::PaymentSettled {
            token_id: record.token_id,
            order_id: message.order_id.clone(),
            delivery_id: message.delivery_id.clone(),
            outcome: message.outcome,
            payer_wallet: message.payer_wallet,
        };
        match message.outcome {
            PaymentOutcome::Paid => {
                let payer = message
                    .payer_wallet
                    .filter(|w| !w.is_zero())
                    .ok_or_else(|| Error::InvalidInput("paid message carries no payer wallet".into()))?;
                Ok(Some(vec![
                    settled,
                    Transition::TokenTransferred {
                        token_id: record.token_id,
                        from: WalletAddress::ZERO,
                        to: payer,
                    },
                ]))
            }
            PaymentOutcome::Failed | PaymentOutcome::Expired => Ok(Some(vec![settled])),
        }
    }

    pub(crate) fn apply_open(&mut self, token_id: TokenId, order_id: &str) -> Result<()> {
        if self.orders.contains_key(order_id) {
            return Err(Error::Conflict(format!("order {order_id} already opened")));
        }
        self.orders.insert(order_id.to_string(), token_id);
        let record = self.records.entry(token_id).or_insert_with(|| EscrowRecord {
            token_id,
            order_id: order_id.to_string(),
            state: EscrowState::AwaitingPayment,
            processed_delivery_ids: BTreeSet::new(),
        });
        if record.state == EscrowState::Released {
            return Err(Error::InvalidState(format!("token {token_id} was already released")));
        }
        record.order_id = order_id.to_string();
        record.state = EscrowState::AwaitingPayment;
        Ok(())
    }

    pub(crate) fn apply_settled(
        &mut self,
        token_id: TokenId,
        order_id: &str,
        delivery_id: &str,
        outcome: PaymentOutcome,
    ) -> Result<()> {
        let record = self
            .records
            .get_mut(&token_id)
            .ok_or_else(|| Error::not_found("escrow", token_id))?;
        if record.order_id != order_id || record.state != EscrowState::AwaitingPayment {
            return Err(Error::InvalidState(format!(
                "settlement for order {order_id} does not match escrow of token {token_id}"
            )));
        }
        record.processed_delivery_ids.insert(delivery_id.to_string());
        record.state = match outcome {
            PaymentOutcome::Paid => EscrowState::Released,
            PaymentOutcome::Failed | PaymentOutcome::Expired => EscrowState::Abandoned,
        };
        Ok(())
    }
}
