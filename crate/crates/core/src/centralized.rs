//! Crowdfund kept in a single output: the whole donor map lives in its datum
//! and a covenant forces every spending transaction to recreate it.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bval::BVal;
use crate::ledger::{CtrId, Input, Output, OutputRef, PubKey, TimeInterval, Tx};
use crate::script::{Datum, Script, ScriptContext};
use crate::wallet::{TokenId, Wallet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrowdfundParams {
    pub owner: PubKey,
    pub goal: u64,
    pub t_wd: u64,
    pub t_rf: u64,
    pub token: TokenId,
}

pub type Donations = Arc<Vec<(PubKey, u64)>>;

/// The covenant output holding `donations`.
pub fn covenant_output(params: &CrowdfundParams, donations: Donations) -> Output {
    let total: u64 = donations.iter().map(|(_, a)| a).sum();
    Output {
        value: Wallet::of(params.token, total),
        validator: Script::CentralizedCrowdfund(params.clone()),
        datum: Datum::Donations(donations),
        in_contract: false,
    }
}

/// `donations` with `amount` added to `donor`.
pub fn add_donation(donations: &[(PubKey, u64)], donor: &PubKey, amount: u64) -> Donations {
    let mut next = donations.to_vec();
    match next.binary_search_by(|(k, _)| k.cmp(donor)) {
        Ok(i) => next[i].1 += amount,
        Err(i) => next.insert(i, (donor.clone(), amount)),
    }
    Arc::new(next)
}

/// `donations` without `donor`, and the amount removed.
pub fn remove_donation(donations: &[(PubKey, u64)], donor: &PubKey) -> Option<(Donations, u64)> {
    let i = donations.binary_search_by(|(k, _)| k.cmp(donor)).ok()?;
    let mut next = donations.to_vec();
    let (_, amount) = next.remove(i);
    Some((Arc::new(next), amount))
}

fn op(args: &[BVal]) -> Option<(&str, &[BVal])> {
    match args.split_first()? {
        (BVal::Str(s), rest) => Some((s.as_str(), rest)),
        _ => None,
    }
}

/// The covenant.
pub fn check(params: &CrowdfundParams, ctx: &ScriptContext<'_>) -> bool {
    check_inner(params, ctx).is_some()
}

fn check_inner(params: &CrowdfundParams, ctx: &ScriptContext<'_>) -> Option<()> {
    let tx = ctx.tx;
    let (me, out) = ctx.input(ctx.self_index)?;
    if !me.spent {
        return None;
    }
    let covenants = ctx
        .siblings
        .iter()
        .filter(|o| matches!(o.validator, Script::CentralizedCrowdfund(_)))
        .count();
    if covenants != 1 {
        return None;
    }
    let Datum::Donations(donations) = &out.datum else {
        return None;
    };
    if *out != covenant_output(params, donations.clone()) {
        return None;
    }
    let Datum::Args(args) = &me.redeemer else {
        return None;
    };
    let (name, rest) = op(args)?;
    match (name, rest) {
        ("donate", [x, BVal::Str(a)]) => {
            let x = x.as_u64().filter(|x| *x > 0)?;
            let next = add_donation(donations, &PubKey::new(a), x);
            (tx.outputs.first()? == &covenant_output(params, next)).then_some(())
        }
        ("refund", [BVal::Str(a)]) => {
            if tx.validity.from < params.t_rf {
                return None;
            }
            let donor = PubKey::new(a);
            let (next, amount) = remove_donation(donations, &donor)?;
            let ok = tx.outputs.len() >= 2
                && tx.outputs[0] == Output::deposit(donor, Wallet::of(params.token, amount))
                && tx.outputs[1] == covenant_output(params, next);
            ok.then_some(())
        }
        ("withdraw", []) => {
            let total = out.value.get(params.token);
            let ok = tx.signers.contains(&params.owner)
                && params.t_wd <= tx.validity.from
                && tx.validity.to < params.t_rf
                && total >= params.goal
                && tx.outputs.first()? == &Output::deposit(params.owner.clone(), out.value.clone());
            ok.then_some(())
        }
        _ => None,
    }
}

fn args(op: &str, rest: Vec<BVal>) -> Datum {
    let mut v = vec![BVal::Str(String::from(op))];
    v.extend(rest);
    Datum::Args(v)
}

fn covenant_input(at: OutputRef, redeemer: Datum) -> Input {
    let mut i = Input::spend(at);
    i.redeemer = redeemer;
    i
}

/// Creates the covenant with no donations, paid for by `fee_deposit`.
pub fn deploy_tx(params: &CrowdfundParams, fee_deposit: OutputRef, fee: u64, signer: PubKey) -> Tx {
    Tx {
        inputs: vec![Input::spend(fee_deposit)],
        outputs: vec![covenant_output(params, Arc::new(Vec::new()))],
        signers: vec![signer],
        validity: TimeInterval::ALWAYS,
        fee,
        ctr_id: CtrId::NONE,
    }
}

/// A donation of `amount` by `donor`, spending the donation and fee deposits.
#[allow(clippy::too_many_arguments)]
pub fn donate_tx(
    params: &CrowdfundParams,
    covenant: OutputRef,
    donations: &[(PubKey, u64)],
    donor: &PubKey,
    amount: u64,
    deposit: OutputRef,
    fee_deposit: OutputRef,
    fee: u64,
) -> Tx {
    let next = add_donation(donations, donor, amount);
    let redeemer = args("donate", vec![BVal::from(amount), BVal::str(donor.as_str())]);
    Tx {
        inputs: vec![
            covenant_input(covenant, redeemer),
            Input::spend(fee_deposit),
            Input::spend(deposit),
        ],
        outputs: vec![covenant_output(params, next)],
        signers: vec![donor.clone()],
        validity: TimeInterval::ALWAYS,
        fee,
        ctr_id: CtrId::NONE,
    }
}

/// A refund of everything `donor` gave. `None` if they gave nothing.
pub fn refund_tx(
    params: &CrowdfundParams,
    covenant: OutputRef,
    donations: &[(PubKey, u64)],
    donor: &PubKey,
    fee_deposit: OutputRef,
    fee: u64,
) -> Option<Tx> {
    let (next, amount) = remove_donation(donations, donor)?;
    let redeemer = args("refund", vec![BVal::str(donor.as_str())]);
    Some(Tx {
        inputs: vec![covenant_input(covenant, redeemer), Input::spend(fee_deposit)],
        outputs: vec![
            Output::deposit(donor.clone(), Wallet::of(params.token, amount)),
            covenant_output(params, next),
        ],
        signers: vec![donor.clone()],
        validity: TimeInterval::new(params.t_rf, u64::MAX),
        fee,
        ctr_id: CtrId::NONE,
    })
}

/// The owner collecting everything.
pub fn withdraw_tx(
    params: &CrowdfundParams,
    covenant: OutputRef,
    total: u64,
    fee_deposit: OutputRef,
    fee: u64,
    validity: TimeInterval,
) -> Tx {
    Tx {
        inputs: vec![covenant_input(covenant, args("withdraw", vec![])), Input::spend(fee_deposit)],
        outputs: vec![Output::deposit(params.owner.clone(), Wallet::of(params.token, total))],
        signers: vec![params.owner.clone()],
        validity,
        fee,
        ctr_id: CtrId::NONE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::Crypto;
    use crate::ledger::Ledger;

    const T: TokenId = TokenId(1);

    fn params() -> CrowdfundParams {
        CrowdfundParams {
            owner: PubKey::new("owner"),
            goal: 5,
            t_wd: 100,
            t_rf: 200,
            token: T,
        }
    }

    fn pk(s: &str) -> PubKey {
        PubKey::new(s)
    }

    fn setup() -> Ledger {
        let fee = |k: &str| Output::deposit(pk(k), Wallet::native(1));
        let genesis = vec![
            fee("owner"),
            fee("alice"),
            Output::deposit(pk("alice"), Wallet::of(T, 3)),
            fee("bob"),
            Output::deposit(pk("bob"), Wallet::of(T, 4)),
            fee("alice"),
            fee("owner"),
            fee("bob"),
        ];
        let mut l = Ledger::with_genesis(Arc::new(Crypto::default()), genesis);
        let id = l.apply_tx(deploy_tx(&params(), OutputRef::new(0, 0), 1, pk("owner"))).unwrap();
        assert_eq!(id, 1);
        l
    }

    fn donations(l: &Ledger, r: OutputRef) -> Donations {
        match &l.resolve(&r).unwrap().datum {
            Datum::Donations(d) => d.clone(),
            _ => panic!("not a covenant"),
        }
    }

    #[test]
    fn donate_refund_cycle() {
        let p = params();
        let mut l = setup();
        let mut cov = OutputRef::new(1, 0);
        let d = donations(&l, cov);
        let tx = donate_tx(&p, cov, &d, &pk("alice"), 3, OutputRef::new(0, 2), OutputRef::new(0, 1), 1);
        cov = OutputRef::new(l.apply_tx(tx).unwrap(), 0);
        let d = donations(&l, cov);
        let tx = donate_tx(&p, cov, &d, &pk("bob"), 4, OutputRef::new(0, 4), OutputRef::new(0, 3), 1);
        cov = OutputRef::new(l.apply_tx(tx).unwrap(), 0);
        assert_eq!(l.resolve(&cov).unwrap().value, Wallet::of(T, 7));

        let d = donations(&l, cov);
        let early = refund_tx(&p, cov, &d, &pk("alice"), OutputRef::new(0, 5), 1).unwrap();
        assert_eq!(l.validate_tx(&early).failed_condition(), Some(4));
        l.advance_time(200).unwrap();
        let id = l.apply_tx(early).unwrap();
        assert_eq!(l.resolve(&OutputRef::new(id, 0)).unwrap().value, Wallet::of(T, 3));
        assert_eq!(l.resolve(&OutputRef::new(id, 1)).unwrap().value, Wallet::of(T, 4));
    }

    #[test]
    fn covenant_refuses_bad_successors() {
        let p = params();
        let l = setup();
        let cov = OutputRef::new(1, 0);
        let d = donations(&l, cov);
        let mut tx = donate_tx(&p, cov, &d, &pk("alice"), 3, OutputRef::new(0, 2), OutputRef::new(0, 1), 1);
        // Claiming more than was paid.
        tx.outputs[0] = covenant_output(&p, add_donation(&d, &pk("alice"), 100));
        assert_eq!(l.validate_tx(&tx).failed_condition(), Some(5));
        // Dropping the covenant.
        tx.outputs[0] = Output::deposit(pk("alice"), Wallet::of(T, 3));
        assert_eq!(l.validate_tx(&tx).failed_condition(), Some(5));
        // Withdrawing before the goal is reached.
        let wd = withdraw_tx(&p, cov, 0, OutputRef::new(0, 6), 1, TimeInterval::new(0, 150));
        assert_eq!(l.validate_tx(&wd).failed_condition(), Some(5));
    }

    #[test]
    fn withdraw_after_goal() {
        let p = params();
        let mut l = setup();
        let cov = OutputRef::new(1, 0);
        let d = donations(&l, cov);
        let tx = donate_tx(&p, cov, &d, &pk("bob"), 4, OutputRef::new(0, 4), OutputRef::new(0, 3), 1);
        let cov = OutputRef::new(l.apply_tx(tx).unwrap(), 0);
        let d = donations(&l, cov);
        let tx = donate_tx(&p, cov, &d, &pk("alice"), 3, OutputRef::new(0, 2), OutputRef::new(0, 1), 1);
        let cov = OutputRef::new(l.apply_tx(tx).unwrap(), 0);
        l.advance_time(120).unwrap();
        let wd = withdraw_tx(&p, cov, 7, OutputRef::new(0, 6), 1, TimeInterval::new(110, 150));
        l.apply_tx(wd).unwrap();
    }
}
