//! Compilation of hURF contracts to hUTXO transactions, and the logic script
//! that keeps invocations faithful to the rules.
//!
//! An invocation transaction has the layout
//!
//! ```text
//! in:  logic(read) fee(spend) reads(read)* receives(spend)* state(spend)*
//! out: sends* state*
//! ```

use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::bval::BVal;
use crate::codec::{encode_state, gen_inputs, gen_outputs, lookup, CodecError, FlatState, ItemIndex, StateItem, StateKey};
use crate::hurf::check::{CheckedContract, CheckedRule};
use crate::hurf::eval::{evaluate_rule, EvalError, RuleError, RuleInput, RuleOutcome};
use crate::ledger::{derive_ctr_id, CtrId, Input, Ledger, Output, OutputRef, PubKey, TimeInterval, Tx, TxId};
use crate::script::{Datum, Script, ScriptContext};
use crate::wallet::{TokenId, Wallet};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("contract has no rule `{0}`")]
    NoRule(alloc::string::String),
    #[error("{0} is not an unspent deposit")]
    NotADeposit(OutputRef),
    #[error("deposit {0} does not hold the required value")]
    DepositMismatch(OutputRef),
    #[error("{expected} receive deposits required, {found} given")]
    ReceiveCount { expected: usize, found: usize },
    #[error("state outputs already spent: {0:?}")]
    Stale(Vec<OutputRef>),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// The on-chain footprint of a deployed contract, as tracked by a client.
#[derive(Clone, Debug)]
pub struct DeployedContract {
    pub ctr: CtrId,
    pub contract: Arc<CheckedContract>,
    /// Logic output of each rule, in rule order.
    pub logic: Vec<OutputRef>,
    items: ItemIndex<OutputRef>,
    by_ref: HashMap<OutputRef, StateItem>,
}

impl DeployedContract {
    /// Tracks the contract created by `tx`, appended as transaction `id`.
    pub fn from_deploy(contract: Arc<CheckedContract>, tx: &Tx, id: TxId) -> Self {
        let n = contract.rules.len();
        let mut d = DeployedContract {
            ctr: tx.ctr_id,
            logic: (0..n as u32).map(|i| OutputRef::new(id, i)).collect(),
            contract,
            items: ItemIndex::new(),
            by_ref: HashMap::new(),
        };
        d.absorb(tx, id);
        d
    }

    /// Follows the state changes made by `tx`, appended as transaction `id`.
    pub fn absorb(&mut self, tx: &Tx, id: TxId) {
        if tx.ctr_id != self.ctr {
            return;
        }
        for input in tx.inputs.iter().filter(|i| i.spent) {
            if let Some(item) = self.by_ref.remove(&input.out_ref) {
                self.items.remove(&item);
            }
        }
        for (i, o) in tx.outputs.iter().enumerate() {
            if let Some(item) = StateItem::from_output(o) {
                let r = OutputRef::new(id, i as u32);
                self.items
                    .insert(item.clone(), r)
                    .expect("contract state items never overlap");
                self.by_ref.insert(r, item);
            }
        }
    }

    pub fn items(&self) -> &ItemIndex<OutputRef> {
        &self.items
    }

    /// `Σ` as currently represented on chain.
    pub fn state(&self) -> Result<FlatState, CodecError> {
        crate::codec::decode_state(self.items.items().cloned())
    }

    fn item_ref(&self, item: &StateItem) -> OutputRef {
        *self.items.get(item).expect("item comes from this index")
    }
}

/// The logic output guarding `rule`.
pub fn logic_output(rule: &Arc<CheckedRule>) -> Output {
    Output {
        value: Wallet::new(),
        validator: Script::Logic(rule.clone()),
        datum: Datum::Logic,
        in_contract: true,
    }
}

fn deposit<'l>(ledger: &'l Ledger, r: &OutputRef) -> Result<&'l Output, CompileError> {
    match ledger.unspent(r) {
        Some(o) if !o.in_contract && matches!(o.validator, Script::PkLock(_)) => Ok(o),
        _ => Err(CompileError::NotADeposit(*r)),
    }
}

fn fee_of(ledger: &Ledger, r: &OutputRef) -> Result<u64, CompileError> {
    let o = deposit(ledger, r)?;
    if o.value.iter().any(|(t, _)| t != TokenId::NATIVE) {
        return Err(CompileError::DepositMismatch(*r));
    }
    Ok(o.value.get(TokenId::NATIVE))
}

/// The transaction deploying `contract` with initial state `state`.
///
/// The fee deposit pays the whole fee; the funding deposits become the
/// contract's initial balance.
pub fn compile_deploy(
    ledger: &Ledger,
    contract: &CheckedContract,
    state: &FlatState,
    fee_deposit: OutputRef,
    funding: &[OutputRef],
    signers: Vec<PubKey>,
) -> Result<Tx, CompileError> {
    let fee = fee_of(ledger, &fee_deposit)?;
    let mut inputs = Vec::with_capacity(1 + funding.len());
    inputs.push(Input::spend(fee_deposit));
    for r in funding {
        deposit(ledger, r)?;
        inputs.push(Input::spend(*r));
    }
    let mut outputs: Vec<Output> = contract.rules.iter().map(logic_output).collect();
    outputs.extend(encode_state(state).iter().map(StateItem::to_output));
    Ok(Tx {
        inputs,
        outputs,
        signers,
        validity: TimeInterval::ALWAYS,
        fee,
        ctr_id: derive_ctr_id(ledger.hasher(), &fee_deposit),
    })
}

/// An invocation request.
#[derive(Clone, Debug)]
pub struct Invocation<'a> {
    pub rule: &'a str,
    pub params: Vec<BVal>,
    pub signers: Vec<PubKey>,
    pub receive_deposits: Vec<OutputRef>,
    pub fee_deposit: OutputRef,
    pub validity: TimeInterval,
}

/// The transaction invoking a rule of `deployed` against its current state.
pub fn compile_invoke(ledger: &Ledger, deployed: &DeployedContract, inv: &Invocation<'_>) -> Result<Tx, CompileError> {
    build_invoke(ledger, deployed, inv, true).map(|(tx, _)| tx)
}

/// Like [`compile_invoke`] but does not evaluate the precondition, so the
/// result may be a transaction the logic script refuses.
pub fn compile_invoke_unchecked(
    ledger: &Ledger,
    deployed: &DeployedContract,
    inv: &Invocation<'_>,
) -> Result<Tx, CompileError> {
    build_invoke(ledger, deployed, inv, false).map(|(tx, _)| tx)
}

/// Compiles an invocation and also returns the evaluated rule outcome.
pub fn compile_invoke_with_outcome(
    ledger: &Ledger,
    deployed: &DeployedContract,
    inv: &Invocation<'_>,
) -> Result<(Tx, RuleOutcome), CompileError> {
    build_invoke(ledger, deployed, inv, true)
}

fn build_invoke(
    ledger: &Ledger,
    deployed: &DeployedContract,
    inv: &Invocation<'_>,
    enforce_require: bool,
) -> Result<(Tx, RuleOutcome), CompileError> {
    let (idx, rule) = deployed
        .contract
        .rule(inv.rule)
        .ok_or_else(|| CompileError::NoRule(inv.rule.into()))?;
    let hasher = ledger.hasher();
    let input = RuleInput {
        params: &inv.params,
        signers: &inv.signers,
        validity: inv.validity,
        hasher,
    };
    let items = deployed.items();
    let mut reader = |k: &StateKey| {
        lookup(items, &k.hash)
            .map(|(v, _)| v)
            .map_err(|_| EvalError::Missing(k.source.preimage()))
    };
    let outcome = evaluate_rule(rule, &input, &mut reader, enforce_require)?;

    let mut inputs = Vec::new();
    let mut used = Vec::new();
    let mut logic_in = Input::read(deployed.logic[idx]);
    logic_in.redeemer = Datum::Args(inv.params.clone());
    inputs.push(logic_in);
    used.push(deployed.logic[idx]);

    let fee = fee_of(ledger, &inv.fee_deposit)?;
    inputs.push(Input::spend(inv.fee_deposit));

    for (k, _) in &outcome.reads {
        let (_, witness) = lookup(items, &k.hash)?;
        let r = deployed.item_ref(witness);
        used.push(r);
        inputs.push(Input::read(r));
    }

    if inv.receive_deposits.len() != outcome.receives.len() {
        return Err(CompileError::ReceiveCount {
            expected: outcome.receives.len(),
            found: inv.receive_deposits.len(),
        });
    }
    for (r, (t, a)) in inv.receive_deposits.iter().zip(&outcome.receives) {
        if deposit(ledger, r)?.value != Wallet::of(*t, *a) {
            return Err(CompileError::DepositMismatch(*r));
        }
        inputs.push(Input::spend(*r));
    }

    let updates = outcome.updates();
    let spent_items = gen_inputs(items, &updates)?;
    for item in &spent_items {
        let r = deployed.item_ref(item);
        used.push(r);
        inputs.push(Input::spend(r));
    }

    let stale: Vec<OutputRef> = used.into_iter().filter(|r| ledger.is_spent(r)).collect();
    if !stale.is_empty() {
        return Err(CompileError::Stale(stale));
    }

    let mut outputs: Vec<Output> = outcome
        .sends
        .iter()
        .map(|(to, t, a)| Output::deposit(to.clone(), Wallet::of(*t, *a)))
        .collect();
    outputs.extend(gen_outputs(&spent_items, &updates)?.iter().map(StateItem::to_output));

    let tx = Tx {
        inputs,
        outputs,
        signers: inv.signers.clone(),
        validity: inv.validity,
        fee,
        ctr_id: deployed.ctr,
    };
    Ok((tx, outcome))
}

/// The logic script of `rule`: accepts exactly the transactions that apply
/// `rule` to the current contract state.
pub fn check_rule_tx(rule: &CheckedRule, ctx: &ScriptContext<'_>) -> bool {
    check(rule, ctx).is_some()
}

fn check(rule: &CheckedRule, ctx: &ScriptContext<'_>) -> Option<()> {
    let tx = ctx.tx;
    if ctx.self_index != 0 {
        return None;
    }
    let (logic, _) = ctx.input(0)?;
    if logic.spent {
        return None;
    }
    let Datum::Args(params) = &logic.redeemer else {
        return None;
    };

    let (fee_in, fee_out) = ctx.input(1)?;
    if !fee_in.spent || fee_out.in_contract || fee_out.value != Wallet::native(tx.fee) {
        return None;
    }

    let mut segment: Vec<StateItem> = Vec::new();
    let mut i = 2;
    while let Some((input, o)) = ctx.input(i) {
        if input.spent {
            break;
        }
        segment.push(StateItem::from_output(o)?);
        i += 1;
    }

    let input = RuleInput {
        params,
        signers: &tx.signers,
        validity: tx.validity,
        hasher: ctx.hasher,
    };
    let mut reader = |k: &StateKey| {
        segment
            .iter()
            .find(|item| item.covers(&k.hash))
            .map(StateItem::value)
            .ok_or_else(|| EvalError::Missing(k.source.preimage()))
    };
    let outcome = evaluate_rule(rule, &input, &mut reader, true).ok()?;
    if outcome.reads.len() != segment.len()
        || !outcome
            .reads
            .iter()
            .zip(&segment)
            .all(|((k, _), item)| item.covers(&k.hash))
    {
        return None;
    }

    for (t, a) in &outcome.receives {
        let (input, o) = ctx.input(i)?;
        if !input.spent || o.in_contract || o.value != Wallet::of(*t, *a) {
            return None;
        }
        i += 1;
    }

    let m = outcome.sends.len();
    if tx.outputs.len() < m {
        return None;
    }
    for ((to, t, a), o) in outcome.sends.iter().zip(&tx.outputs) {
        if *o != Output::deposit(to.clone(), Wallet::of(*t, *a)) {
            return None;
        }
    }

    let mut tail = Vec::with_capacity(tx.inputs.len() - i);
    while let Some((input, o)) = ctx.input(i) {
        if !input.spent {
            return None;
        }
        tail.push(StateItem::from_output(o)?);
        i += 1;
    }
    let index = ItemIndex::from_items(tail.iter().cloned()).ok()?;
    let updates = outcome.updates();
    if gen_inputs(&index, &updates).ok()? != tail {
        return None;
    }
    let expected = gen_outputs(&tail, &updates).ok()?;
    let rest = &tx.outputs[m..];
    if rest.len() != expected.len() || rest.iter().zip(&expected).any(|(o, item)| *o != item.to_output()) {
        return None;
    }
    Some(())
}
