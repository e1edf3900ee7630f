use hutxo_core::hurf::semantics::State;
use hutxo_core::BVal;
use rand::Rng;

use super::{build_distributed, load_contract, rng, Planned, PlannedCall, Workload};

pub const SOURCE: &str = include_str!("../../contracts/map.hurf");

/// `ops` increments; each hits `m[0]` with probability `p`, otherwise a key
/// never used before.
pub fn gen_map(p: f64, ops: usize, seed: u64) -> Workload {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    let contract = load_contract(SOURCE);
    let mut r = rng(seed, 0);
    let mut fresh = 0i64;
    let plan = (0..ops)
        .map(|_| {
            let i = if r.random_bool(p) {
                0
            } else {
                fresh += 1;
                fresh
            };
            let v: i64 = r.random_range(1..=9);
            Planned::Call(PlannedCall::new("inc", vec![BVal::int(i), BVal::int(v)]))
        })
        .collect();
    let initial = State::initial(&contract);
    build_distributed("map", contract, initial, plan)
}
