//! Datums, the closed set of script kinds and their evaluation.

use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bval::BVal;
use crate::centralized::{self, CrowdfundParams};
use crate::compiler;
use crate::hash::{Hash512, KeyHasher};
use crate::hurf::check::CheckedRule;
use crate::ledger::{Input, Output, PubKey, Tx};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Datum {
    Empty,
    /// Marks a rule's logic output.
    Logic,
    /// `["non-default", h, v]`
    NonDefault { key: Hash512, value: BVal },
    /// `["default", h', h'']`
    Default { from: Hash512, to: Hash512 },
    /// Rule parameters or covenant redeemer arguments.
    Args(Vec<BVal>),
    /// Whole donor map of the centralized crowdfund, sorted by donor.
    Donations(Arc<Vec<(PubKey, u64)>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Script {
    /// Spendable by a transaction signed by the key.
    PkLock(PubKey),
    /// Enforces one hURF rule.
    Logic(Arc<CheckedRule>),
    /// Guard of a state item.
    State,
    /// Single-output crowdfund covenant.
    CentralizedCrowdfund(CrowdfundParams),
}

/// What a script sees: the redeeming transaction and the outputs its inputs refer to.
#[derive(Clone, Copy)]
pub struct ScriptContext<'a> {
    pub tx: &'a Tx,
    /// `siblings[i]` is the output referred by `tx.inputs[i]`.
    pub siblings: &'a [&'a Output],
    pub self_index: usize,
    pub hasher: &'a dyn KeyHasher,
}

impl<'a> ScriptContext<'a> {
    pub fn input(&self, i: usize) -> Option<(&'a Input, &'a Output)> {
        Some((self.tx.inputs.get(i)?, *self.siblings.get(i)?))
    }
}

/// Runs `script` in `ctx`. Malformed data makes a script fail.
pub fn eval_script(script: &Script, ctx: &ScriptContext<'_>) -> bool {
    match script {
        Script::PkLock(k) => ctx.tx.signers.contains(k),
        Script::State => match ctx.siblings.first() {
            Some(o) => o.in_contract && o.datum == Datum::Logic,
            None => false,
        },
        Script::Logic(rule) => compiler::check_rule_tx(rule, ctx),
        Script::CentralizedCrowdfund(params) => centralized::check(params, ctx),
    }
}
