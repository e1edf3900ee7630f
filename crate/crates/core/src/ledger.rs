//! The hUTXO ledger: transactions, contract accounts, validity and update.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashSet;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::encode;
use crate::hash::{Crypto, Hash512, KeyHasher};
use crate::script::{eval_script, Datum, Script, ScriptContext};
use crate::wallet::Wallet;

/// Transactions are numbered by their position in the ledger.
pub type TxId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutputRef {
    #[serde(rename = "txId")]
    pub tx: TxId,
    pub index: u32,
}

impl OutputRef {
    pub fn new(tx: TxId, index: u32) -> Self {
        OutputRef { tx, index }
    }
}

impl fmt::Display for OutputRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.tx, self.index)
    }
}

/// A public key identifier. Keys are plain names in the simulator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PubKey(pub Arc<str>);

impl PubKey {
    pub fn new(name: &str) -> Self {
        PubKey(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PubKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Output {
    pub value: Wallet,
    pub validator: Script,
    pub datum: Datum,
    #[serde(rename = "inContract")]
    pub in_contract: bool,
}

impl Output {
    /// A signature-locked output holding `value`.
    pub fn deposit(owner: PubKey, value: Wallet) -> Self {
        Output {
            value,
            validator: Script::PkLock(owner),
            datum: Datum::Empty,
            in_contract: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Input {
    #[serde(rename = "outRef")]
    pub out_ref: OutputRef,
    pub redeemer: Datum,
    pub spent: bool,
}

impl Input {
    pub fn spend(out_ref: OutputRef) -> Self {
        Input {
            out_ref,
            redeemer: Datum::Empty,
            spent: true,
        }
    }

    pub fn read(out_ref: OutputRef) -> Self {
        Input {
            out_ref,
            redeemer: Datum::Empty,
            spent: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeInterval {
    pub from: u64,
    pub to: u64,
}

impl TimeInterval {
    pub const ALWAYS: TimeInterval = TimeInterval {
        from: 0,
        to: u64::MAX,
    };

    pub fn new(from: u64, to: u64) -> Self {
        TimeInterval { from, to }
    }

    pub fn contains(&self, t: u64) -> bool {
        self.from <= t && t <= self.to
    }
}

/// Contract identifier. The all-zero value means "no contract".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CtrId(pub Hash512);

impl CtrId {
    pub const NONE: CtrId = CtrId(Hash512::MIN);

    pub fn is_none(&self) -> bool {
        *self == Self::NONE
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tx {
    #[serde(rename = "in")]
    pub inputs: Vec<Input>,
    #[serde(rename = "out")]
    pub outputs: Vec<Output>,
    pub signers: Vec<PubKey>,
    #[serde(rename = "validityTime")]
    pub validity: TimeInterval,
    pub fee: u64,
    #[serde(rename = "ctrId")]
    pub ctr_id: CtrId,
}

impl Tx {
    pub fn first_spent(&self) -> Option<&Input> {
        self.inputs.iter().find(|i| i.spent)
    }
}

/// Hash of the canonical encoding of an output reference.
pub fn derive_ctr_id(hasher: &dyn KeyHasher, first_spent: &OutputRef) -> CtrId {
    CtrId(hasher.hash(&encode::output_ref(first_spent)))
}

/// Why a transaction is invalid. [`Violation::condition`] gives the validity rule number.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("input {input} does not refer to an unspent output")]
    Unresolved { input: usize },
    #[error("input {input} spends an output already spent by this transaction")]
    DuplicateSpend { input: usize },
    #[error("no input is spent")]
    NoSpentInput,
    #[error("ledger time {time} is outside the validity interval")]
    OutsideValidity { time: u64 },
    #[error("signature of signer {signer} does not verify")]
    BadSignature { signer: usize },
    #[error("the script of the output referred by input {input} fails")]
    Script { input: usize },
    #[error("input {input} refers to a contract output of another contract")]
    ForeignContract { input: usize },
    #[error("a transaction without contract outputs must have ctrId 0")]
    UnexpectedCtrId,
    #[error("a fresh contract id must be the hash of the first spent input")]
    BadFreshCtrId,
    #[error("inputs do not cover outputs and fee")]
    Unbalanced,
    #[error("inputs and contract account do not cover outputs and fee")]
    InsufficientAccount,
    #[error("value overflow")]
    Overflow,
}

impl Violation {
    /// The validity condition (1 to 9) this violation breaks.
    pub fn condition(&self) -> u8 {
        match self {
            Violation::Unresolved { .. } => 1,
            Violation::DuplicateSpend { .. } => 2,
            Violation::NoSpentInput => 3,
            Violation::OutsideValidity { .. } => 4,
            Violation::BadSignature { .. } | Violation::Script { .. } => 5,
            Violation::ForeignContract { .. } => 6,
            Violation::UnexpectedCtrId | Violation::BadFreshCtrId => 7,
            Violation::Unbalanced | Violation::Overflow => 8,
            Violation::InsufficientAccount => 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationResult {
    pub outcome: Result<(), Violation>,
    /// Signature verifications performed.
    pub signatures: u32,
}

impl ValidationResult {
    pub fn accepted(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn failed_condition(&self) -> Option<u8> {
        self.outcome.as_ref().err().map(Violation::condition)
    }
}

/// Value moved by a transaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueFlow {
    pub v_in: Wallet,
    pub v_out: Wallet,
    pub v_fee: Wallet,
}

impl ValueFlow {
    /// `vOut + vFee`.
    pub fn demand(&self) -> Option<Wallet> {
        self.v_out.checked_add(&self.v_fee)
    }

    /// Per-token positive part of `vOut + vFee - vIn`: what the tx needs from its account.
    pub fn draw(&self) -> Option<Wallet> {
        Some(self.demand()?.excess_over(&self.v_in))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("time cannot go back from {now} to {requested}")]
    TimeRegression { now: u64, requested: u64 },
    #[error(transparent)]
    Invalid(#[from] Violation),
}

#[derive(Clone)]
pub struct Ledger {
    txs: Vec<Tx>,
    accounts: BTreeMap<CtrId, Wallet>,
    time: u64,
    spent: HashSet<OutputRef>,
    crypto: Arc<Crypto>,
}

impl Ledger {
    pub fn new(crypto: Arc<Crypto>) -> Self {
        Ledger {
            txs: Vec::new(),
            accounts: BTreeMap::new(),
            time: 0,
            spent: HashSet::new(),
            crypto,
        }
    }

    /// A ledger whose transaction 0 mints `outputs` out of nothing.
    pub fn with_genesis(crypto: Arc<Crypto>, outputs: Vec<Output>) -> Self {
        let mut l = Ledger::new(crypto);
        l.txs.push(Tx {
            inputs: Vec::new(),
            outputs,
            signers: Vec::new(),
            validity: TimeInterval::ALWAYS,
            fee: 0,
            ctr_id: CtrId::NONE,
        });
        l
    }

    pub fn txs(&self) -> &[Tx] {
        &self.txs
    }

    pub fn tx(&self, id: TxId) -> Option<&Tx> {
        self.txs.get(usize::try_from(id).ok()?)
    }

    pub fn next_tx_id(&self) -> TxId {
        self.txs.len() as TxId
    }

    pub fn accounts(&self) -> &BTreeMap<CtrId, Wallet> {
        &self.accounts
    }

    pub fn account(&self, ctr: &CtrId) -> Wallet {
        self.accounts.get(ctr).cloned().unwrap_or_default()
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn crypto(&self) -> &Arc<Crypto> {
        &self.crypto
    }

    pub fn hasher(&self) -> &dyn KeyHasher {
        &*self.crypto.hasher
    }

    /// The output `r` points to, spent or not.
    pub fn resolve(&self, r: &OutputRef) -> Option<&Output> {
        self.tx(r.tx)?.outputs.get(r.index as usize)
    }

    pub fn is_spent(&self, r: &OutputRef) -> bool {
        self.spent.contains(r)
    }

    pub fn unspent(&self, r: &OutputRef) -> Option<&Output> {
        if self.spent.contains(r) {
            None
        } else {
            self.resolve(r)
        }
    }

    pub fn unspent_outputs(&self) -> Vec<(OutputRef, &Output)> {
        let mut out = Vec::new();
        for (id, tx) in self.txs.iter().enumerate() {
            for (index, o) in tx.outputs.iter().enumerate() {
                let r = OutputRef::new(id as TxId, index as u32);
                if !self.spent.contains(&r) {
                    out.push((r, o));
                }
            }
        }
        out
    }

    /// Value flowing in, out and to fees. Fails when a spent input does not resolve.
    pub fn tx_value_flow(&self, tx: &Tx) -> Result<ValueFlow, Violation> {
        let mut v_in = Wallet::new();
        for (i, input) in tx.inputs.iter().enumerate() {
            if input.spent {
                let o = self
                    .resolve(&input.out_ref)
                    .ok_or(Violation::Unresolved { input: i })?;
                v_in = v_in.checked_add(&o.value).ok_or(Violation::Overflow)?;
            }
        }
        let mut v_out = Wallet::new();
        for o in &tx.outputs {
            v_out = v_out.checked_add(&o.value).ok_or(Violation::Overflow)?;
        }
        Ok(ValueFlow {
            v_in,
            v_out,
            v_fee: Wallet::native(tx.fee),
        })
    }

    pub fn validate_tx(&self, tx: &Tx) -> ValidationResult {
        self.validate_tx_with(tx, None)
    }

    /// Validates `tx`, checking rule 9 against `available` instead of the
    /// recorded account when given.
    pub fn validate_tx_with(&self, tx: &Tx, available: Option<&Wallet>) -> ValidationResult {
        let mut signatures = 0;
        let outcome = self.check(tx, available, &mut signatures);
        ValidationResult {
            outcome,
            signatures,
        }
    }

    fn check(&self, tx: &Tx, available: Option<&Wallet>, signatures: &mut u32) -> Result<(), Violation> {
        let mut siblings = Vec::with_capacity(tx.inputs.len());
        for (i, input) in tx.inputs.iter().enumerate() {
            match self.unspent(&input.out_ref) {
                Some(o) => siblings.push(o),
                None => return Err(Violation::Unresolved { input: i }),
            }
        }

        let mut seen = HashSet::with_capacity(tx.inputs.len());
        for (i, input) in tx.inputs.iter().enumerate() {
            if input.spent && !seen.insert(input.out_ref) {
                return Err(Violation::DuplicateSpend { input: i });
            }
        }
        if seen.is_empty() {
            return Err(Violation::NoSpentInput);
        }

        if !tx.validity.contains(self.time) {
            return Err(Violation::OutsideValidity { time: self.time });
        }

        for signer in 0..tx.signers.len() {
            *signatures += 1;
            if !self.crypto.signature.verify() {
                return Err(Violation::BadSignature { signer });
            }
        }

        let hasher = self.hasher();
        for (i, o) in siblings.iter().enumerate() {
            let ctx = ScriptContext {
                tx,
                siblings: &siblings,
                self_index: i,
                hasher,
            };
            if !eval_script(&o.validator, &ctx) {
                return Err(Violation::Script { input: i });
            }
        }

        let mut refers_contract = false;
        for (i, (input, o)) in tx.inputs.iter().zip(&siblings).enumerate() {
            if o.in_contract {
                refers_contract = true;
                let owner = &self.txs[input.out_ref.tx as usize];
                if owner.ctr_id != tx.ctr_id {
                    return Err(Violation::ForeignContract { input: i });
                }
            }
        }
        if !refers_contract {
            if tx.outputs.iter().any(|o| o.in_contract) {
                let first = tx.first_spent().expect("checked above");
                if derive_ctr_id(hasher, &first.out_ref) != tx.ctr_id {
                    return Err(Violation::BadFreshCtrId);
                }
            } else if !tx.ctr_id.is_none() {
                return Err(Violation::UnexpectedCtrId);
            }
        }

        let flow = self.tx_value_flow(tx)?;
        let demand = flow.demand().ok_or(Violation::Overflow)?;
        if tx.ctr_id.is_none() {
            if !flow.v_in.covers(&demand) {
                return Err(Violation::Unbalanced);
            }
        } else {
            let account = match available {
                Some(w) => w.clone(),
                None => self.account(&tx.ctr_id),
            };
            let supply = flow.v_in.checked_add(&account).ok_or(Violation::Overflow)?;
            if !supply.covers(&demand) {
                return Err(Violation::InsufficientAccount);
            }
        }
        Ok(())
    }

    pub fn derive_ctr_id(&self, tx: &Tx) -> Option<CtrId> {
        tx.first_spent()
            .map(|i| derive_ctr_id(self.hasher(), &i.out_ref))
    }

    /// Validates and appends `tx`, returning its id.
    pub fn apply_tx(&mut self, tx: Tx) -> Result<TxId, Violation> {
        self.validate_tx(&tx).outcome?;
        Ok(self.apply_validated(tx))
    }

    /// Appends a transaction already known to be valid against this ledger.
    ///
    /// # Panics
    ///
    /// Panics if a spent input does not resolve or the contract account would
    /// go negative.
    pub fn apply_validated(&mut self, tx: Tx) -> TxId {
        let flow = self
            .tx_value_flow(&tx)
            .expect("apply_validated: unresolvable input");
        if !tx.ctr_id.is_none() {
            let acc = self.account(&tx.ctr_id);
            let next = acc
                .checked_add(&flow.v_in)
                .and_then(|w| w.checked_sub(&flow.v_out))
                .and_then(|w| w.checked_sub(&flow.v_fee))
                .expect("apply_validated: contract account would go negative");
            if next.is_zero() {
                self.accounts.remove(&tx.ctr_id);
            } else {
                self.accounts.insert(tx.ctr_id, next);
            }
        }
        for input in &tx.inputs {
            if input.spent {
                self.spent.insert(input.out_ref);
            }
        }
        let id = self.next_tx_id();
        self.txs.push(tx);
        id
    }

    pub fn advance_time(&mut self, t: u64) -> Result<(), LedgerError> {
        if t < self.time {
            return Err(LedgerError::TimeRegression {
                now: self.time,
                requested: t,
            });
        }
        self.time = t;
        Ok(())
    }
}

impl fmt::Debug for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ledger")
            .field("txs", &self.txs.len())
            .field("accounts", &self.accounts)
            .field("time", &self.time)
            .finish()
    }
}

/// Serializes as `{"txs": [...], "accounts": [[ctrId, wallet], ...], "time": t}`.
impl Serialize for Ledger {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Accounts<'a>(&'a BTreeMap<CtrId, Wallet>);
        impl Serialize for Accounts<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_seq(self.0.iter())
            }
        }
        let mut st = s.serialize_struct("Ledger", 3)?;
        st.serialize_field("txs", &self.txs)?;
        st.serialize_field("accounts", &Accounts(&self.accounts))?;
        st.serialize_field("time", &self.time)?;
        st.end()
    }
}
