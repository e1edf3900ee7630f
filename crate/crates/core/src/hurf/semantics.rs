//! Reference semantics of hURF: contract instances, user deposits and time.
//!
//! This interpreter knows nothing about transactions and serves as the
//! oracle the compiled contracts are tested against.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::check::CheckedContract;
use super::eval::{evaluate_rule, RuleError, RuleInput};
use crate::bval::BVal;
use crate::codec::{FlatState, KeySource, StateKey};
use crate::hash::KeyHasher;
use crate::ledger::{CtrId, PubKey, TimeInterval};
use crate::wallet::{TokenId, Wallet};

/// A contract state `σ`. Locations holding 0 are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct State {
    pub vars: BTreeMap<String, BVal>,
    pub maps: BTreeMap<String, BTreeMap<Vec<BVal>, BVal>>,
}

impl State {
    /// Declared initial values.
    pub fn initial(contract: &CheckedContract) -> Self {
        let mut s = State::default();
        for (name, v) in contract.initial_vars() {
            s.set(&KeySource::Var(name.into()), v);
        }
        s
    }

    pub fn get(&self, src: &KeySource) -> BVal {
        match src {
            KeySource::Var(x) => self.vars.get(x).cloned(),
            KeySource::Map(m, point) => self.maps.get(m).and_then(|m| m.get(point)).cloned(),
        }
        .unwrap_or_else(BVal::zero)
    }

    pub fn set(&mut self, src: &KeySource, v: BVal) {
        match src {
            KeySource::Var(x) => {
                if v.is_default() {
                    self.vars.remove(x);
                } else {
                    self.vars.insert(x.clone(), v);
                }
            }
            KeySource::Map(m, point) => {
                if v.is_default() {
                    if let Some(entries) = self.maps.get_mut(m) {
                        entries.remove(point);
                        if entries.is_empty() {
                            self.maps.remove(m);
                        }
                    }
                } else {
                    self.maps.entry(m.clone()).or_default().insert(point.clone(), v);
                }
            }
        }
    }

    pub fn sources(&self) -> impl Iterator<Item = (KeySource, &BVal)> {
        let vars = self.vars.iter().map(|(x, v)| (KeySource::Var(x.clone()), v));
        let maps = self
            .maps
            .iter()
            .flat_map(|(m, e)| e.iter().map(move |(p, v)| (KeySource::Map(m.clone(), p.clone()), v)));
        vars.chain(maps)
    }

    /// `Σ`: every non-default location keyed by the hash of its preimage.
    pub fn flatten(&self, hasher: &dyn KeyHasher) -> FlatState {
        self.sources()
            .map(|(src, v)| (StateKey::new(src, hasher).hash, v.clone()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub contract: Arc<CheckedContract>,
    pub state: State,
    pub balance: Wallet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deposit {
    pub owner: PubKey,
    pub value: Wallet,
}

/// A contract action as submitted by users.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub ctr: CtrId,
    pub rule: String,
    pub params: Vec<BVal>,
    pub signers: Vec<PubKey>,
    /// One deposit per receive precondition, in order.
    pub receive_deposits: Vec<String>,
    /// Holds exactly the fee, in the native token.
    pub fee_deposit: String,
    pub validity: TimeInterval,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("no contract instance {0:?}")]
    NoInstance(CtrId),
    #[error("contract instance {0:?} already exists")]
    InstanceExists(CtrId),
    #[error("no rule `{0}`")]
    NoRule(String),
    #[error("no deposit `{0}`")]
    NoDeposit(String),
    #[error("deposit `{0}` is used twice")]
    DepositReused(String),
    #[error("deposit `{0}` is not owned by a signer")]
    NotOwner(String),
    #[error("deposit `{0}` does not hold the required value")]
    DepositMismatch(String),
    #[error("{expected} receive deposits required, {found} given")]
    ReceiveCount { expected: usize, found: usize },
    #[error("time {time} outside the validity interval")]
    Time { time: u64 },
    #[error("contract balance cannot cover the sends")]
    Insufficient,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Clone, Debug)]
pub struct Configuration {
    pub instances: BTreeMap<CtrId, Instance>,
    pub deposits: BTreeMap<String, Deposit>,
    pub time: u64,
    counter: u64,
    hasher: Arc<dyn KeyHasher>,
}

impl Configuration {
    pub fn new(hasher: Arc<dyn KeyHasher>) -> Self {
        Configuration {
            instances: BTreeMap::new(),
            deposits: BTreeMap::new(),
            time: 0,
            counter: 0,
            hasher,
        }
    }

    pub fn hasher(&self) -> &dyn KeyHasher {
        &*self.hasher
    }

    pub fn add_deposit(&mut self, name: &str, owner: PubKey, value: Wallet) {
        self.deposits.insert(name.into(), Deposit { owner, value });
    }

    /// Creates a deposit with a fresh name and returns the name.
    pub fn fresh_deposit(&mut self, owner: PubKey, value: Wallet) -> String {
        let name = alloc::format!("#{}", self.counter);
        self.counter += 1;
        self.add_deposit(&name, owner, value);
        name
    }

    pub fn advance_time(&mut self, t: u64) {
        assert!(t >= self.time, "time cannot go backwards");
        self.time = t;
    }

    fn take_deposits(&self, names: &[&str], signers: &[PubKey]) -> Result<Vec<Wallet>, StepError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            if !seen.insert(*n) {
                return Err(StepError::DepositReused((*n).into()));
            }
            let d = self.deposits.get(*n).ok_or_else(|| StepError::NoDeposit((*n).into()))?;
            if !signers.contains(&d.owner) {
                return Err(StepError::NotOwner((*n).into()));
            }
            out.push(d.value.clone());
        }
        Ok(out)
    }

    fn fee_of(&self, name: &str) -> Result<(), StepError> {
        let d = &self.deposits[name];
        if d.value.iter().any(|(t, _)| t != TokenId::NATIVE) {
            return Err(StepError::DepositMismatch(name.into()));
        }
        Ok(())
    }

    /// Deploys `contract` as instance `ctr` with state `state`.
    ///
    /// The fee deposit is burned and the funding deposits become the balance.
    pub fn deploy(
        &mut self,
        ctr: CtrId,
        contract: Arc<CheckedContract>,
        state: State,
        signers: &[PubKey],
        fee_deposit: &str,
        funding: &[String],
    ) -> Result<(), StepError> {
        if self.instances.contains_key(&ctr) {
            return Err(StepError::InstanceExists(ctr));
        }
        let mut names: Vec<&str> = Vec::with_capacity(funding.len() + 1);
        names.push(fee_deposit);
        names.extend(funding.iter().map(String::as_str));
        let values = self.take_deposits(&names, signers)?;
        self.fee_of(fee_deposit)?;
        let balance = values[1..]
            .iter()
            .try_fold(Wallet::new(), |a, w| a.checked_add(w))
            .ok_or(StepError::Insufficient)?;
        for n in names {
            self.deposits.remove(n);
        }
        self.instances.insert(
            ctr,
            Instance {
                contract,
                state,
                balance,
            },
        );
        Ok(())
    }

    /// Performs `action` atomically; on error nothing changes.
    pub fn step(&mut self, action: &Action) -> Result<(), StepError> {
        let inst = self
            .instances
            .get(&action.ctr)
            .ok_or(StepError::NoInstance(action.ctr))?;
        let (_, rule) = inst
            .contract
            .rule(&action.rule)
            .ok_or_else(|| StepError::NoRule(action.rule.clone()))?;
        if !action.validity.contains(self.time) {
            return Err(StepError::Time { time: self.time });
        }
        let mut names: Vec<&str> = Vec::with_capacity(action.receive_deposits.len() + 1);
        names.push(&action.fee_deposit);
        names.extend(action.receive_deposits.iter().map(String::as_str));
        let values = self.take_deposits(&names, &action.signers)?;
        self.fee_of(&action.fee_deposit)?;

        let input = RuleInput {
            params: &action.params,
            signers: &action.signers,
            validity: action.validity,
            hasher: &*self.hasher,
        };
        let state = &inst.state;
        let mut reader = |k: &StateKey| Ok(state.get(&k.source));
        let outcome = evaluate_rule(rule, &input, &mut reader, true)?;

        if outcome.receives.len() != action.receive_deposits.len() {
            return Err(StepError::ReceiveCount {
                expected: outcome.receives.len(),
                found: action.receive_deposits.len(),
            });
        }
        for ((t, a), (name, have)) in outcome
            .receives
            .iter()
            .zip(action.receive_deposits.iter().zip(&values[1..]))
        {
            if *have != Wallet::of(*t, *a) {
                return Err(StepError::DepositMismatch(name.clone()));
            }
        }
        let balance = inst
            .balance
            .checked_add(&outcome.received())
            .and_then(|b| b.checked_sub(&outcome.sent()))
            .ok_or(StepError::Insufficient)?;

        for n in names {
            self.deposits.remove(n);
        }
        let inst = self.instances.get_mut(&action.ctr).expect("checked above");
        for (k, v) in &outcome.writes {
            inst.state.set(&k.source, v.clone());
        }
        inst.balance = balance;
        for (to, t, a) in outcome.sends {
            self.fresh_deposit(to, Wallet::of(t, a));
        }
        Ok(())
    }

    /// Sum of all deposits and balances.
    pub fn total_tokens(&self) -> Wallet {
        self.deposits
            .values()
            .map(|d| &d.value)
            .chain(self.instances.values().map(|i| &i.balance))
            .fold(Wallet::new(), |a, w| a.checked_add(w).expect("token total overflows u64"))
    }
}
