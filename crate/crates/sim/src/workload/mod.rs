//! Benchmark workload generators.
//!
//! A generator plans its calls first, mints one fee deposit per transaction
//! plus every deposit a call receives from at genesis, and then compiles each
//! call against the state left by its predecessors. Every generated
//! transaction is therefore valid when the sequence is replayed in order.

pub mod crowdfund;
pub mod map;
pub mod multisig;
pub mod registry;

use std::sync::Arc;

use hutxo_core::batch::Event;
use hutxo_core::compiler::{compile_deploy, compile_invoke, DeployedContract, Invocation};
use hutxo_core::hurf::semantics::State;
use hutxo_core::hurf::{check_contract, parse_contract, CheckedContract};
use hutxo_core::{BVal, Crypto, CtrId, Ledger, Output, OutputRef, PubKey, TimeInterval, TokenId, Wallet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::format::Sequence;

pub use crowdfund::{gen_crowdfund, CrowdfundMode};
pub use map::gen_map;
pub use multisig::{gen_multisig, multisig_source};
pub use registry::gen_registry;

/// Pays every transaction fee.
pub const FEE_PAYER: &str = "pubkey_fees";
/// Token moved by the benchmark contracts.
pub const TOKEN: TokenId = TokenId(1);

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Parses and checks a contract source. Panics on error: generator sources
/// are fixed.
pub fn load_contract(src: &str) -> Arc<CheckedContract> {
    let ast = parse_contract(src).unwrap_or_else(|e| panic!("contract source: {e}"));
    Arc::new(check_contract(&ast).unwrap_or_else(|e| panic!("contract source: {e}")))
}

/// A rule call before deposits are assigned.
#[derive(Clone, Debug)]
pub struct PlannedCall {
    pub rule: &'static str,
    pub params: Vec<BVal>,
    /// Signers besides the fee payer.
    pub signers: Vec<PubKey>,
    /// Owner of the receive deposits.
    pub payer: Option<PubKey>,
    pub receives: Vec<Wallet>,
    pub validity: TimeInterval,
}

impl PlannedCall {
    pub fn new(rule: &'static str, params: Vec<BVal>) -> Self {
        PlannedCall {
            rule,
            params,
            signers: Vec::new(),
            payer: None,
            receives: Vec::new(),
            validity: TimeInterval::ALWAYS,
        }
    }

    pub fn signed_by(mut self, k: PubKey) -> Self {
        self.signers.push(k);
        self
    }

    pub fn paying(mut self, payer: PubKey, value: Wallet) -> Self {
        if !self.signers.contains(&payer) {
            self.signers.push(payer.clone());
        }
        self.payer = Some(payer);
        self.receives.push(value);
        self
    }

    pub fn valid(mut self, validity: TimeInterval) -> Self {
        self.validity = validity;
        self
    }
}

#[derive(Clone, Debug)]
pub enum Planned {
    Call(PlannedCall),
    Tick(u64),
}

/// A call with its deposits assigned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Call {
    pub rule: String,
    pub params: Vec<BVal>,
    pub signers: Vec<PubKey>,
    pub receive_deposits: Vec<OutputRef>,
    pub fee_deposit: OutputRef,
    pub validity: TimeInterval,
}

impl Call {
    pub fn invocation(&self) -> Invocation<'_> {
        Invocation {
            rule: &self.rule,
            params: self.params.clone(),
            signers: self.signers.clone(),
            receive_deposits: self.receive_deposits.clone(),
            fee_deposit: self.fee_deposit,
            validity: self.validity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Call(Call),
    Tick(u64),
}

/// What a reference interpreter needs to replay a distributed workload.
#[derive(Clone, Debug)]
pub struct ContractRun {
    pub contract: Arc<CheckedContract>,
    pub initial: State,
    pub ctr: CtrId,
    pub deploy_fee: OutputRef,
    pub deploy_signers: Vec<PubKey>,
    pub steps: Vec<Step>,
}

/// A generated benchmark sequence.
#[derive(Clone, Debug)]
pub struct Workload {
    pub benchmark: &'static str,
    pub sequence: Sequence,
    /// Present for contracts compiled from hURF.
    pub contract: Option<ContractRun>,
}

impl Workload {
    pub fn ledger(&self) -> Ledger {
        self.sequence.ledger()
    }

    pub fn events(&self) -> &[Event] {
        &self.sequence.events
    }

    /// Signatures a validator checks when it accepts every transaction.
    pub fn expected_signatures(&self) -> u64 {
        self.sequence
            .events
            .iter()
            .map(|e| match e {
                Event::Tx(tx) => tx.signers.len() as u64,
                Event::Tick(_) => 0,
            })
            .sum()
    }
}

pub(crate) fn fee_payer() -> PubKey {
    PubKey::new(FEE_PAYER)
}

pub(crate) struct Genesis {
    pub outputs: Vec<Output>,
}

impl Genesis {
    pub fn new() -> Self {
        Genesis { outputs: Vec::new() }
    }

    pub fn mint(&mut self, owner: PubKey, value: Wallet) -> OutputRef {
        self.outputs.push(Output::deposit(owner, value));
        OutputRef::new(0, self.outputs.len() as u32 - 1)
    }

    pub fn fee(&mut self) -> OutputRef {
        self.mint(fee_payer(), Wallet::native(1))
    }
}

/// Deploys `contract` with `initial` and compiles `plan` against it.
pub fn build_distributed(
    benchmark: &'static str,
    contract: Arc<CheckedContract>,
    initial: State,
    plan: Vec<Planned>,
) -> Workload {
    let fees = fee_payer();
    let mut genesis = Genesis::new();
    let deploy_fee = genesis.fee();
    let steps: Vec<Step> = plan
        .into_iter()
        .map(|p| match p {
            Planned::Tick(t) => Step::Tick(t),
            Planned::Call(c) => {
                let fee_deposit = genesis.fee();
                let payer = c.payer.clone().unwrap_or_else(|| fees.clone());
                let receive_deposits = c.receives.iter().map(|w| genesis.mint(payer.clone(), w.clone())).collect();
                let mut signers = c.signers;
                signers.push(fees.clone());
                Step::Call(Call {
                    rule: c.rule.into(),
                    params: c.params,
                    signers,
                    receive_deposits,
                    fee_deposit,
                    validity: c.validity,
                })
            }
        })
        .collect();

    let mut ledger = Ledger::with_genesis(Arc::new(Crypto::default()), genesis.outputs.clone());
    let flat = initial.flatten(ledger.hasher());
    let deploy_signers = vec![fees];
    let deploy = compile_deploy(&ledger, &contract, &flat, deploy_fee, &[], deploy_signers.clone())
        .expect("deploy compiles");
    let id = ledger.apply_validated(deploy.clone());
    let mut deployed = DeployedContract::from_deploy(contract.clone(), &deploy, id);
    let mut events = Vec::with_capacity(steps.len() + 1);
    events.push(Event::Tx(deploy));
    for s in &steps {
        match s {
            Step::Tick(t) => {
                ledger.advance_time(*t).expect("ticks move forward");
                events.push(Event::Tick(*t));
            }
            Step::Call(c) => {
                let tx = compile_invoke(&ledger, &deployed, &c.invocation())
                    .unwrap_or_else(|e| panic!("{benchmark}: planned call {} {:?}: {e}", c.rule, c.params));
                let id = ledger.apply_validated(tx.clone());
                deployed.absorb(&tx, id);
                events.push(Event::Tx(tx));
            }
        }
    }
    Workload {
        benchmark,
        sequence: Sequence {
            genesis: genesis.outputs,
            events,
        },
        contract: Some(ContractRun {
            ctr: deployed.ctr,
            contract,
            initial,
            deploy_fee,
            deploy_signers,
            steps,
        }),
    }
}
