//! Conflict detection and batched validation of transaction sequences.
//!
//! Two transactions conflict when one spends an output the other spends or
//! reads, when one uses an output created by the other, or when their
//! combined contract draws could exceed the contract account.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use hashbrown::HashSet;
use serde::{Deserialize, Serialize};

use crate::ledger::{CtrId, Ledger, OutputRef, Tx, TxId, ValidationResult};
use crate::wallet::Wallet;

/// An element of a sequence to validate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Event {
    Tx(Tx),
    /// Moves the ledger clock forward to the given time.
    Tick(u64),
}

/// Bookkeeping for the batch under construction.
#[derive(Clone, Debug, Default)]
pub struct BatchState {
    pub spent: HashSet<OutputRef>,
    pub read: HashSet<OutputRef>,
    pub frozen: BTreeMap<CtrId, Wallet>,
    /// Transactions with this id or above do not exist in the snapshot.
    pub snapshot_len: TxId,
}

impl BatchState {
    pub fn new(ledger: &Ledger) -> Self {
        BatchState {
            snapshot_len: ledger.next_tx_id(),
            ..Default::default()
        }
    }

    fn created_in_batch(&self, r: &OutputRef) -> bool {
        r.tx >= self.snapshot_len
    }

    /// `accounts[ctr] - frozen[ctr]`.
    pub fn available(&self, ledger: &Ledger, ctr: &CtrId) -> Wallet {
        let acc = ledger.account(ctr);
        match self.frozen.get(ctr) {
            Some(f) => acc.checked_sub(f).expect("frozen never exceeds the account"),
            None => acc,
        }
    }

    fn admit(&mut self, tx: &Tx, draw: Option<&Wallet>) {
        for i in &tx.inputs {
            if i.spent {
                self.spent.insert(i.out_ref);
            } else {
                self.read.insert(i.out_ref);
            }
        }
        if let Some(d) = draw {
            if !d.is_zero() {
                let f = self.frozen.entry(tx.ctr_id).or_default();
                *f = f.checked_add(d).expect("frozen total fits in the account");
            }
        }
    }
}

/// The most `tx` may take from its contract account: the positive part of
/// `vOut + vFee - vIn`. `None` for transactions outside any contract, and zero
/// when the inputs do not resolve.
pub fn contract_draw(ledger: &Ledger, tx: &Tx) -> Option<Wallet> {
    if tx.ctr_id.is_none() {
        return None;
    }
    Some(
        ledger
            .tx_value_flow(tx)
            .ok()
            .and_then(|f| f.draw())
            .unwrap_or_default(),
    )
}

fn ref_conflict(tx: &Tx, batch: &BatchState) -> bool {
    tx.inputs.iter().any(|i| {
        let r = &i.out_ref;
        batch.created_in_batch(r) || batch.spent.contains(r) || (i.spent && batch.read.contains(r))
    })
}

fn fits(ledger: &Ledger, tx: &Tx, draw: Option<&Wallet>, batch: &BatchState) -> bool {
    match draw {
        Some(d) => batch.available(ledger, &tx.ctr_id).covers(d),
        None => true,
    }
}

/// Whether `tx` cannot join `batch`.
pub fn conflicts_with(ledger: &Ledger, tx: &Tx, batch: &BatchState) -> bool {
    let draw = contract_draw(ledger, tx);
    ref_conflict(tx, batch) || !fits(ledger, tx, draw.as_ref(), batch)
}

/// A member of a batch: its position in the sequence and the account
/// available to it, for contract transactions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub index: usize,
    pub available: Option<Wallet>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Prefix {
    pub members: Vec<Member>,
    /// The prefix stopped at a transaction conflicting with it.
    pub ended_by_conflict: bool,
}

/// The longest conflict-free run of transactions starting at `from`.
///
/// A tick or the end of the sequence also ends the run. The first
/// transaction is always taken.
pub fn conflict_free_prefix(ledger: &Ledger, events: &[Event], from: usize) -> (Prefix, BatchState) {
    let mut batch = BatchState::new(ledger);
    let mut prefix = Prefix::default();
    for (index, ev) in events.iter().enumerate().skip(from) {
        let Event::Tx(tx) = ev else { break };
        let draw = contract_draw(ledger, tx);
        let first = prefix.members.is_empty();
        let fits = fits(ledger, tx, draw.as_ref(), &batch);
        if !first && (ref_conflict(tx, &batch) || !fits) {
            prefix.ended_by_conflict = true;
            break;
        }
        let available = draw.as_ref().map(|_| batch.available(ledger, &tx.ctr_id));
        batch.admit(tx, draw.as_ref().filter(|_| fits));
        prefix.members.push(Member { index, available });
    }
    (prefix, batch)
}

/// Totals over a validated sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub txs: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub ticks: usize,
    /// Batches of transactions validated together; 0 for sequential runs.
    pub batches: usize,
    /// Transactions that ended a batch by conflicting with it.
    pub conflicts: usize,
    pub signatures: u64,
}

impl RunStats {
    pub fn soft_conflict_fraction(&self) -> f64 {
        if self.txs == 0 {
            0.0
        } else {
            self.conflicts as f64 / self.txs as f64
        }
    }

    fn record(&mut self, r: &ValidationResult) {
        self.txs += 1;
        self.signatures += u64::from(r.signatures);
        if r.accepted() {
            self.accepted += 1;
        } else {
            self.rejected += 1;
        }
    }
}

fn tick(ledger: &mut Ledger, t: u64, stats: &mut RunStats) {
    stats.ticks += 1;
    // Ticks never move the clock backwards.
    let t = t.max(ledger.time());
    ledger.advance_time(t).expect("time is monotone");
}

/// Validates and applies `events` one at a time, skipping invalid transactions.
pub fn validate_sequential(ledger: &mut Ledger, events: &[Event]) -> RunStats {
    let mut stats = RunStats::default();
    for ev in events {
        match ev {
            Event::Tick(t) => tick(ledger, *t, &mut stats),
            Event::Tx(tx) => {
                let r = ledger.validate_tx(tx);
                stats.record(&r);
                if r.accepted() {
                    ledger.apply_validated(tx.clone());
                }
            }
        }
    }
    stats
}

/// Validates `events` in conflict-free batches.
///
/// `validate` receives the pre-batch ledger and the batch, and returns one
/// result per member in order; it may validate members in any order or
/// concurrently. Accepted members are then applied in sequence order.
pub fn validate_batched<F>(ledger: &mut Ledger, events: &[Event], mut validate: F) -> RunStats
where
    F: FnMut(&Ledger, &[(&Tx, Option<&Wallet>)]) -> Vec<ValidationResult>,
{
    let mut stats = RunStats::default();
    let mut i = 0;
    while i < events.len() {
        match &events[i] {
            Event::Tick(t) => {
                tick(ledger, *t, &mut stats);
                i += 1;
            }
            Event::Tx(_) => {
                let (prefix, _) = conflict_free_prefix(ledger, events, i);
                let batch: Vec<(&Tx, Option<&Wallet>)> = prefix
                    .members
                    .iter()
                    .map(|m| match &events[m.index] {
                        Event::Tx(tx) => (tx, m.available.as_ref()),
                        Event::Tick(_) => unreachable!("prefixes hold transactions only"),
                    })
                    .collect();
                let results = validate(ledger, &batch);
                assert_eq!(results.len(), batch.len(), "one result per batch member");
                stats.batches += 1;
                if prefix.ended_by_conflict {
                    stats.conflicts += 1;
                }
                for ((tx, _), r) in batch.iter().zip(&results) {
                    stats.record(r);
                    if r.accepted() {
                        ledger.apply_validated((*tx).clone());
                    }
                }
                i += prefix.members.len();
            }
        }
    }
    stats
}

/// [`validate_batched`] with members validated one after the other.
pub fn validate_batched_inline(ledger: &mut Ledger, events: &[Event]) -> RunStats {
    validate_batched(ledger, events, |l, batch| {
        batch.iter().map(|(tx, avail)| l.validate_tx_with(tx, *avail)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::Crypto;
    use crate::ledger::{Input, Output, PubKey, TimeInterval};
    use crate::script::{Datum, Script};
    use crate::wallet::TokenId;
    use alloc::sync::Arc;
    use alloc::vec;

    fn pk() -> PubKey {
        PubKey::new("k")
    }

    fn pay(from: &[OutputRef], amount: u64) -> Tx {
        Tx {
            inputs: from.iter().map(|r| Input::spend(*r)).collect(),
            outputs: vec![Output::deposit(pk(), Wallet::native(amount))],
            signers: vec![pk()],
            validity: TimeInterval::ALWAYS,
            fee: 0,
            ctr_id: CtrId::NONE,
        }
    }

    fn ledger(n: usize) -> Ledger {
        Ledger::with_genesis(
            Arc::new(Crypto::default()),
            (0..n).map(|_| Output::deposit(pk(), Wallet::native(1))).collect(),
        )
    }

    fn r(tx: u64, i: u32) -> OutputRef {
        OutputRef::new(tx, i)
    }

    #[test]
    fn independent_transactions_form_one_batch() {
        let l = ledger(3);
        let ev: Vec<Event> = (0..3).map(|i| Event::Tx(pay(&[r(0, i)], 1))).collect();
        let (p, b) = conflict_free_prefix(&l, &ev, 0);
        assert_eq!(p.members.len(), 3);
        assert!(!p.ended_by_conflict);
        assert_eq!(b.spent.len(), 3);
    }

    #[test]
    fn dependent_chain_is_split() {
        let mut l = ledger(1);
        let ev = vec![
            Event::Tx(pay(&[r(0, 0)], 1)),
            Event::Tx(pay(&[r(1, 0)], 1)),
            Event::Tx(pay(&[r(2, 0)], 1)),
        ];
        let (p, _) = conflict_free_prefix(&l, &ev, 0);
        assert_eq!(p.members.len(), 1);
        assert!(p.ended_by_conflict);
        let stats = validate_batched_inline(&mut l, &ev);
        assert_eq!((stats.accepted, stats.batches, stats.conflicts), (3, 3, 2));
    }

    #[test]
    fn double_spend_conflicts_and_is_rejected_once() {
        let mut seq_l = ledger(1);
        let ev = vec![Event::Tx(pay(&[r(0, 0)], 1)), Event::Tx(pay(&[r(0, 0)], 0))];
        let s = validate_sequential(&mut seq_l, &ev);
        assert_eq!((s.accepted, s.rejected), (1, 1));
        let mut par_l = ledger(1);
        let p = validate_batched_inline(&mut par_l, &ev);
        assert_eq!((p.accepted, p.rejected, p.conflicts), (1, 1, 1));
        assert_eq!(seq_l.unspent_outputs(), par_l.unspent_outputs());
    }

    #[test]
    fn reads_conflict_only_with_spends() {
        let l = ledger(3);
        let mut a = pay(&[r(0, 0)], 1);
        a.inputs.push(Input::read(r(0, 2)));
        let mut b = pay(&[r(0, 1)], 1);
        b.inputs.push(Input::read(r(0, 2)));
        let c = pay(&[r(0, 2)], 1);
        let (p, _) = conflict_free_prefix(&l, &[Event::Tx(a), Event::Tx(b), Event::Tx(c)], 0);
        assert_eq!(p.members.len(), 2);
        assert!(p.ended_by_conflict);
    }

    #[test]
    fn ticks_end_batches() {
        let mut l = ledger(2);
        let ev = vec![
            Event::Tx(pay(&[r(0, 0)], 1)),
            Event::Tick(5),
            Event::Tx(pay(&[r(0, 1)], 1)),
        ];
        let (p, _) = conflict_free_prefix(&l, &ev, 0);
        assert_eq!(p.members.len(), 1);
        assert!(!p.ended_by_conflict);
        let s = validate_batched_inline(&mut l, &ev);
        assert_eq!((s.batches, s.ticks, l.time()), (2, 1, 5));
    }

    /// A contract with a 3 token account and two withdrawals of 2.
    #[test]
    fn draws_are_frozen() {
        let t = TokenId(1);
        let mut l = Ledger::with_genesis(
            Arc::new(Crypto::default()),
            vec![
                Output::deposit(pk(), Wallet::native(1)),
                Output::deposit(pk(), Wallet::of(t, 3)),
                Output::deposit(pk(), Wallet::native(1)),
                Output::deposit(pk(), Wallet::native(1)),
            ],
        );
        let anchor = Output {
            value: Wallet::new(),
            validator: Script::PkLock(pk()),
            datum: Datum::Empty,
            in_contract: true,
        };
        let ctr = crate::ledger::derive_ctr_id(l.hasher(), &r(0, 0));
        let deploy = Tx {
            inputs: vec![Input::spend(r(0, 0)), Input::spend(r(0, 1))],
            outputs: vec![anchor],
            signers: vec![pk()],
            validity: TimeInterval::ALWAYS,
            fee: 1,
            ctr_id: ctr,
        };
        l.apply_tx(deploy).unwrap();
        assert_eq!(l.account(&ctr), Wallet::of(t, 3));
        let withdraw = |fee_ref: OutputRef| Tx {
            inputs: vec![Input::read(r(1, 0)), Input::spend(fee_ref)],
            outputs: vec![Output::deposit(pk(), Wallet::of(t, 2))],
            signers: vec![pk()],
            validity: TimeInterval::ALWAYS,
            fee: 1,
            ctr_id: ctr,
        };
        let ev = vec![Event::Tx(withdraw(r(0, 2))), Event::Tx(withdraw(r(0, 3)))];
        let (p, b) = conflict_free_prefix(&l, &ev, 0);
        assert_eq!(p.members.len(), 1);
        assert!(p.ended_by_conflict);
        assert_eq!(b.frozen[&ctr], Wallet::of(t, 2));
        let mut seq = l.clone();
        let s = validate_sequential(&mut seq, &ev);
        let mut par = l.clone();
        let q = validate_batched_inline(&mut par, &ev);
        assert_eq!((s.accepted, s.rejected), (1, 1));
        assert_eq!((q.accepted, q.rejected), (1, 1));
        assert_eq!(seq.accounts(), par.accounts());
    }
}
