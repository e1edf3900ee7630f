use std::sync::Arc;

use hutxo_core::batch::Event;
use hutxo_core::centralized::{self, CrowdfundParams, Donations};
use hutxo_core::codec::KeySource;
use hutxo_core::hurf::semantics::State;
use hutxo_core::{BVal, OutputRef, PubKey, TimeInterval, Wallet};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{build_distributed, fee_payer, load_contract, rng, Genesis, Planned, PlannedCall, Workload, TOKEN};
use crate::format::Sequence;

pub const SOURCE: &str = include_str!("../../contracts/crowdfund.hurf");
pub const OWNER: &str = "pubkey_owner";
pub const T_WD: u64 = 100;
pub const T_RF: u64 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CrowdfundMode {
    /// Donor map spread over state items.
    Distributed,
    /// Donor map in the datum of one covenant output.
    Centralized,
}

impl CrowdfundMode {
    pub fn name(self) -> &'static str {
        match self {
            CrowdfundMode::Distributed => "distributed",
            CrowdfundMode::Centralized => "centralized",
        }
    }
}

fn donor(i: usize) -> PubKey {
    PubKey::new(&format!("pubkey_donor_{i}"))
}

/// Donor `i` gives `i + 1` tokens, so amounts are pairwise distinct.
pub fn donation(i: usize) -> u64 {
    i as u64 + 1
}

/// `users` donations, a tick to the refund deadline, then every donor
/// asks for a refund in shuffled order. The goal is `users`.
pub fn gen_crowdfund(mode: CrowdfundMode, users: usize, seed: u64) -> Workload {
    assert!(users >= 1);
    let mut order: Vec<usize> = (0..users).collect();
    order.shuffle(&mut rng(seed, 0));
    match mode {
        CrowdfundMode::Distributed => distributed(users, &order),
        CrowdfundMode::Centralized => centralized(users, &order),
    }
}

fn distributed(users: usize, refunds: &[usize]) -> Workload {
    let contract = load_contract(SOURCE);
    let mut initial = State::initial(&contract);
    initial.set(&KeySource::Var("goal".into()), BVal::from(users as u64));
    let mut plan = Vec::with_capacity(2 * users + 1);
    for i in 0..users {
        let d = donor(i);
        plan.push(Planned::Call(
            PlannedCall::new("donate", vec![BVal::from(donation(i)), BVal::str(d.as_str())])
                .paying(d, Wallet::of(TOKEN, donation(i))),
        ));
    }
    plan.push(Planned::Tick(T_RF));
    for &i in refunds {
        plan.push(Planned::Call(
            PlannedCall::new("refund", vec![BVal::str(donor(i).as_str())]).valid(TimeInterval::new(T_RF, u64::MAX)),
        ));
    }
    build_distributed("crowdfund", contract, initial, plan)
}

pub fn centralized_params(users: usize) -> CrowdfundParams {
    CrowdfundParams {
        owner: PubKey::new(OWNER),
        goal: users as u64,
        t_wd: T_WD,
        t_rf: T_RF,
        token: TOKEN,
    }
}

fn centralized(users: usize, refunds: &[usize]) -> Workload {
    let params = centralized_params(users);
    let fees = fee_payer();
    let mut genesis = Genesis::new();
    let deploy_fee = genesis.fee();
    let gifts: Vec<(OutputRef, OutputRef)> = (0..users)
        .map(|i| (genesis.fee(), genesis.mint(donor(i), Wallet::of(TOKEN, donation(i)))))
        .collect();
    let refund_fees: Vec<OutputRef> = refunds.iter().map(|_| genesis.fee()).collect();

    let mut events = Vec::with_capacity(2 * users + 2);
    let mut next_id = 1;
    let mut push = |events: &mut Vec<Event>, tx| {
        events.push(Event::Tx(tx));
        next_id += 1;
        next_id - 1
    };
    let id = push(&mut events, centralized::deploy_tx(&params, deploy_fee, 1, fees.clone()));
    let mut cov = OutputRef::new(id, 0);
    let mut donations: Donations = Arc::new(Vec::new());
    for (i, (fee, gift)) in gifts.into_iter().enumerate() {
        let d = donor(i);
        let mut tx = centralized::donate_tx(&params, cov, &donations, &d, donation(i), gift, fee, 1);
        tx.signers = vec![d, fees.clone()];
        donations = donations_of(&tx.outputs[0]);
        cov = OutputRef::new(push(&mut events, tx), 0);
    }
    events.push(Event::Tick(T_RF));
    for (&i, fee) in refunds.iter().zip(refund_fees) {
        let mut tx = centralized::refund_tx(&params, cov, &donations, &donor(i), fee, 1).expect("donor gave");
        tx.signers = vec![fees.clone()];
        donations = donations_of(&tx.outputs[1]);
        cov = OutputRef::new(push(&mut events, tx), 1);
    }
    Workload {
        benchmark: "crowdfund",
        sequence: Sequence {
            genesis: genesis.outputs,
            events,
        },
        contract: None,
    }
}

fn donations_of(o: &hutxo_core::Output) -> Donations {
    match &o.datum {
        hutxo_core::Datum::Donations(d) => d.clone(),
        d => unreachable!("covenant output carries {d:?}"),
    }
}
