use std::fmt::Write;

use hutxo_core::hurf::semantics::State;
use hutxo_core::{BVal, PubKey, Wallet};
use rand::seq::index::sample;
use rand::Rng;

use super::{build_distributed, load_contract, rng, Planned, PlannedCall, Workload, TOKEN};

pub const SOURCE: &str = include_str!("../../contracts/multisig.hurf");
pub const OWNER: &str = "pubkey_owner";

/// The multisig contract with `k` co-signers per withdrawal.
pub fn multisig_source(k: usize) -> String {
    assert!(k >= 1);
    let signers: Vec<String> = (1..=k).map(|i| format!("s{i}")).collect();
    let mut conds: Vec<String> = signers.windows(2).map(|w| format!("{} < {}", w[0], w[1])).collect();
    conds.extend(signers.iter().map(|s| format!("auth[{s}] == 1")));
    conds.extend(signers.iter().map(|s| format!("signedBy({s})")));
    let mut src = String::new();
    writeln!(src, "// Multisig wallet, {k} signatures per withdrawal.\n").unwrap();
    writeln!(src, "contract Multisig {{").unwrap();
    writeln!(src, "    map auth(arity=1);").unwrap();
    writeln!(src, "    var owner = \"{OWNER}\";\n").unwrap();
    writeln!(src, "    authorize(u) {{\n        require(signedBy(owner));\n        auth[u] = 1;\n    }}\n").unwrap();
    writeln!(src, "    deposit(x) {{\n        receive(x:T1);\n    }}\n").unwrap();
    writeln!(src, "    withdraw(x, r, {}) {{", signers.join(", ")).unwrap();
    writeln!(src, "        require({});", conds.join(" && ")).unwrap();
    writeln!(src, "        r.send(x:T1);\n    }}\n}}").unwrap();
    src
}

fn user(j: usize) -> PubKey {
    PubKey::new(&format!("pubkey_user_{j}"))
}

/// The owner authorizes `n` users, then `ops` deposits and withdrawals of one
/// token follow, chosen by a fair coin; a deposit is forced while the
/// balance is empty. Each withdrawal is signed by `n / 2` authorized users.
///
/// The deposit/withdraw pattern is drawn from its own stream and does not
/// depend on `n`.
pub fn gen_multisig(n: usize, ops: usize, seed: u64) -> Workload {
    assert!(n >= 2 && n.is_multiple_of(2), "n must be even and at least 2");
    let k = n / 2;
    let contract = load_contract(&multisig_source(k));
    let owner = PubKey::new(OWNER);
    let mut kinds = rng(seed, 1);
    let mut picks = rng(seed, 2);
    let mut plan = Vec::with_capacity(n + ops);
    for j in 0..n {
        plan.push(Planned::Call(
            PlannedCall::new("authorize", vec![BVal::str(user(j).as_str())]).signed_by(owner.clone()),
        ));
    }
    let mut balance = 0u64;
    for _ in 0..ops {
        let withdraw = balance > 0 && kinds.random_bool(0.5);
        if withdraw {
            let mut chosen: Vec<PubKey> = sample(&mut picks, n, k).into_iter().map(user).collect();
            chosen.sort();
            let r = user(picks.random_range(0..n));
            let mut params = vec![BVal::int(1), BVal::str(r.as_str())];
            params.extend(chosen.iter().map(|s| BVal::str(s.as_str())));
            let mut call = PlannedCall::new("withdraw", params);
            for s in chosen {
                call = call.signed_by(s);
            }
            plan.push(Planned::Call(call));
            balance -= 1;
        } else {
            let u = user(picks.random_range(0..n));
            plan.push(Planned::Call(
                PlannedCall::new("deposit", vec![BVal::int(1)]).paying(u, Wallet::of(TOKEN, 1)),
            ));
            balance += 1;
        }
    }
    let initial = State::initial(&contract);
    build_distributed("multisig", contract, initial, plan)
}
