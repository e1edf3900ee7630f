use hutxo_core::hurf::eval::hash_values;
use hutxo_core::hurf::semantics::State;
use hutxo_core::{BVal, Blake2b, PubKey, TimeInterval};
use rand::seq::SliceRandom;

use super::{build_distributed, load_contract, rng, Planned, PlannedCall, Workload};

pub const SOURCE: &str = include_str!("../../contracts/registry.hurf");
pub const DEADLINE: u64 = 100;

/// `hash(name)`, revealed by a claim.
pub fn name_hash(name: &str) -> BVal {
    hash_values(&Blake2b, &[BVal::str(name)])
}

/// `hash(hash(name), user)`, the registered commitment.
pub fn commitment(name: &str, user: &PubKey) -> BVal {
    hash_values(&Blake2b, &[name_hash(name), BVal::str(user.as_str())])
}

/// Every user registers, then claims, a name of their own; after the
/// deadline each confirms ownership.
pub fn gen_registry(users: usize, seed: u64) -> Workload {
    assert!(users >= 1);
    let contract = load_contract(SOURCE);
    let mut r = rng(seed, 0);
    let who: Vec<(PubKey, String)> = (0..users)
        .map(|i| (PubKey::new(&format!("pubkey_user_{i}")), format!("name_{i}")))
        .collect();
    let mut plan = Vec::with_capacity(3 * users + 1);
    for (i, (u, d)) in who.iter().enumerate() {
        let to = 1 + (i as u64 % (DEADLINE - 2));
        plan.push(Planned::Call(
            PlannedCall::new("register", vec![commitment(d, u)]).valid(TimeInterval::new(0, to)),
        ));
    }
    let mut order: Vec<usize> = (0..users).collect();
    order.shuffle(&mut r);
    for &i in &order {
        let (u, d) = &who[i];
        plan.push(Planned::Call(
            PlannedCall::new("claim", vec![name_hash(d), BVal::str(u.as_str())])
                .signed_by(u.clone())
                .valid(TimeInterval::new(0, DEADLINE - 1)),
        ));
    }
    plan.push(Planned::Tick(DEADLINE));
    order.shuffle(&mut r);
    for &i in &order {
        let (u, d) = &who[i];
        plan.push(Planned::Call(
            PlannedCall::new("own", vec![name_hash(d), BVal::str(u.as_str())])
                .signed_by(u.clone())
                .valid(TimeInterval::new(DEADLINE, u64::MAX)),
        ));
    }
    let initial = State::initial(&contract);
    build_distributed("registry", contract, initial, plan)
}
