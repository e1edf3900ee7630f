//! Expression evaluation and whole-rule evaluation.
//!
//! [`evaluate_rule`] is shared by the reference semantics, the transaction
//! builder and the logic script, so all three agree on what a rule does.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{BinOp, Expr, UnOp};
use super::check::{Access, CheckedRule};
use crate::bval::BVal;
use crate::codec::{to_str, KeySource, StateKey};
use crate::encode;
use crate::hash::{Hash512, KeyHasher};
use crate::ledger::{PubKey, TimeInterval};
use crate::wallet::{TokenId, Wallet};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("`{op}` cannot be applied to {found}")]
    Type { op: &'static str, found: &'static str },
    #[error("unknown name `{0}`")]
    Unknown(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no value available for `{0}`")]
    Missing(String),
    #[error("hash collision between `{0}` and `{1}`")]
    Collision(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule `{rule}` takes {expected} parameters, got {found}")]
    Arity {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("precondition does not hold")]
    RequireFalse,
    #[error("amount {0} is not a token quantity")]
    BadAmount(String),
    #[error("recipient {0} is not a public key")]
    BadRecipient(String),
    #[error("location {0:?} is written with two different values")]
    ConflictingWrite(Hash512),
}

/// Everything besides the state that a rule invocation depends on.
#[derive(Clone, Copy)]
pub struct RuleInput<'a> {
    pub params: &'a [BVal],
    pub signers: &'a [PubKey],
    pub validity: TimeInterval,
    pub hasher: &'a dyn KeyHasher,
}

/// The evaluated preconditions and effects of a rule invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOutcome {
    /// Every location read, ascending by key hash.
    pub reads: Vec<(StateKey, BVal)>,
    pub receives: Vec<(TokenId, u64)>,
    pub sends: Vec<(PubKey, TokenId, u64)>,
    /// Writes ascending by key hash, without duplicates.
    pub writes: Vec<(StateKey, BVal)>,
}

impl RuleOutcome {
    pub fn updates(&self) -> Vec<(Hash512, BVal)> {
        self.writes.iter().map(|(k, v)| (k.hash, v.clone())).collect()
    }

    pub fn received(&self) -> Wallet {
        sum(self.receives.iter().map(|(t, a)| (*t, *a)))
    }

    pub fn sent(&self) -> Wallet {
        sum(self.sends.iter().map(|(_, t, a)| (*t, *a)))
    }
}

fn sum(it: impl Iterator<Item = (TokenId, u64)>) -> Wallet {
    it.fold(Wallet::new(), |w, (t, a)| {
        w.checked_add(&Wallet::of(t, a)).expect("token total overflows u64")
    })
}

/// `hash(e1, ..., ek)`: hex digest of the canonical encoding of the tuple.
pub fn hash_values(hasher: &dyn KeyHasher, vals: &[BVal]) -> BVal {
    BVal::Str(hasher.hash(&encode::bval_tuple(vals)).to_hex())
}

/// Supplies the current value of a state location.
pub type Reader<'r> = dyn FnMut(&StateKey) -> Result<BVal, EvalError> + 'r;

struct Env<'a, 'r> {
    rule: &'a CheckedRule,
    input: &'a RuleInput<'a>,
    reader: &'a mut Reader<'r>,
    cache: BTreeMap<Hash512, (KeySource, BVal)>,
}

fn type_err<T>(op: &'static str, v: &BVal) -> Result<T, EvalError> {
    Err(EvalError::Type {
        op,
        found: v.type_name(),
    })
}

fn as_bool(op: &'static str, v: BVal) -> Result<bool, EvalError> {
    match v {
        BVal::Bool(b) => Ok(b),
        other => type_err(op, &other),
    }
}

fn as_int(op: &'static str, v: BVal) -> Result<BigInt, EvalError> {
    match v {
        BVal::Int(n) => Ok(n),
        other => type_err(op, &other),
    }
}

fn as_str(op: &'static str, v: BVal) -> Result<String, EvalError> {
    match v {
        BVal::Str(s) => Ok(s),
        other => type_err(op, &other),
    }
}

impl Env<'_, '_> {
    fn read(&mut self, source: KeySource) -> Result<BVal, EvalError> {
        let key = StateKey::new(source, self.input.hasher);
        if let Some((src, v)) = self.cache.get(&key.hash) {
            if *src != key.source {
                return Err(EvalError::Collision(src.preimage(), key.source.preimage()));
            }
            return Ok(v.clone());
        }
        let v = (self.reader)(&key)?;
        self.cache.insert(key.hash, (key.source, v.clone()));
        Ok(v)
    }

    fn access_key(&mut self, a: &Access) -> Result<KeySource, EvalError> {
        Ok(match a {
            Access::Var(x) => KeySource::Var(x.clone()),
            Access::Map(m, args) => KeySource::Map(m.clone(), self.list(args)?),
        })
    }

    fn list(&mut self, es: &[Expr]) -> Result<Vec<BVal>, EvalError> {
        es.iter().map(|e| self.eval(e)).collect()
    }

    fn eval(&mut self, e: &Expr) -> Result<BVal, EvalError> {
        Ok(match e {
            Expr::Const(v) => v.clone(),
            Expr::Name(n) => match self.rule.param_index(n) {
                Some(i) => self
                    .input
                    .params
                    .get(i)
                    .cloned()
                    .ok_or_else(|| EvalError::Unknown(n.clone()))?,
                None => self.read(KeySource::Var(n.clone()))?,
            },
            Expr::Index { map, args } => {
                let point = self.list(args)?;
                self.read(KeySource::Map(map.clone(), point))?
            }
            Expr::Unary(UnOp::Not, a) => BVal::Bool(!as_bool("not", self.eval(a)?)?),
            Expr::Unary(UnOp::Neg, a) => BVal::Int(-as_int("-", self.eval(a)?)?),
            Expr::Binary(op, l, r) => self.binary(*op, l, r)?,
            Expr::If(c, t, f) => {
                if as_bool("if", self.eval(c)?)? {
                    self.eval(t)?
                } else {
                    self.eval(f)?
                }
            }
            Expr::Hash(args) => {
                let vals = self.list(args)?;
                hash_values(self.input.hasher, &vals)
            }
            Expr::Len(a) => {
                let s = as_str("len", self.eval(a)?)?;
                BVal::Int(BigInt::from(s.chars().count()))
            }
            Expr::Substr(s, i, j) => {
                let s = as_str("substr", self.eval(s)?)?;
                let i = as_int("substr", self.eval(i)?)?;
                let j = as_int("substr", self.eval(j)?)?;
                BVal::Str(substr(&s, &i, &j))
            }
            Expr::ToStr(args) => BVal::Str(to_str(&self.list(args)?)),
            Expr::SignedBy(a) => {
                let k = as_str("signedBy", self.eval(a)?)?;
                BVal::Bool(self.input.signers.iter().any(|s| s.as_str() == k))
            }
            Expr::ValidFrom => BVal::from(self.input.validity.from),
            Expr::ValidTo => BVal::from(self.input.validity.to),
        })
    }

    fn binary(&mut self, op: BinOp, l: &Expr, r: &Expr) -> Result<BVal, EvalError> {
        let sym = op.symbol();
        match op {
            BinOp::And => {
                return Ok(BVal::Bool(
                    as_bool(sym, self.eval(l)?)? && as_bool(sym, self.eval(r)?)?,
                ))
            }
            BinOp::Or => {
                return Ok(BVal::Bool(
                    as_bool(sym, self.eval(l)?)? || as_bool(sym, self.eval(r)?)?,
                ))
            }
            _ => {}
        }
        let a = self.eval(l)?;
        let b = self.eval(r)?;
        Ok(match op {
            BinOp::Eq => BVal::Bool(a == b),
            BinOp::Ne => BVal::Bool(a != b),
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let ord = match (&a, &b) {
                    (BVal::Int(x), BVal::Int(y)) => x.cmp(y),
                    (BVal::Str(x), BVal::Str(y)) => x.cmp(y),
                    (BVal::Int(_), _) | (BVal::Str(_), _) => return type_err(sym, &b),
                    _ => return type_err(sym, &a),
                };
                BVal::Bool(match op {
                    BinOp::Lt => ord.is_lt(),
                    BinOp::Le => ord.is_le(),
                    BinOp::Gt => ord.is_gt(),
                    _ => ord.is_ge(),
                })
            }
            BinOp::Concat => {
                let mut s = as_str(sym, a)?;
                s.push_str(&as_str(sym, b)?);
                BVal::Str(s)
            }
            _ => {
                let x = as_int(sym, a)?;
                let y = as_int(sym, b)?;
                BVal::Int(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div | BinOp::Mod if y.is_zero() => return Err(EvalError::DivisionByZero),
                    BinOp::Div => x / y,
                    BinOp::Mod => x % y,
                    _ => unreachable!("boolean operators handled above"),
                })
            }
        })
    }
}

/// Characters `i..=j` of `s`, with both bounds clamped into the string.
fn substr(s: &str, i: &BigInt, j: &BigInt) -> String {
    let n = s.chars().count();
    if n == 0 {
        return String::new();
    }
    let clamp = |x: &BigInt| -> usize {
        if x.sign() == num_bigint::Sign::Minus {
            0
        } else {
            x.to_usize().unwrap_or(usize::MAX).min(n - 1)
        }
    };
    let (i, j) = (clamp(i), clamp(j));
    if i > j {
        return String::new();
    }
    s.chars().skip(i).take(j - i + 1).collect()
}

/// Evaluates a single expression outside any rule, with no parameters.
pub fn eval_expr(e: &Expr, input: &RuleInput<'_>, reader: &mut Reader<'_>) -> Result<BVal, EvalError> {
    let rule = CheckedRule {
        contract: String::new(),
        name: String::new(),
        params: Vec::new(),
        receives: Vec::new(),
        require: Expr::Const(BVal::Bool(true)),
        sends: Vec::new(),
        writes: Vec::new(),
        reads: Vec::new(),
    };
    let mut env = Env {
        rule: &rule,
        input,
        reader,
        cache: BTreeMap::new(),
    };
    env.eval(e)
}

fn amount(v: BVal) -> Result<u64, RuleError> {
    v.as_u64().ok_or_else(|| RuleError::BadAmount(alloc::format!("{v}")))
}

/// Evaluates every precondition and effect of `rule` against the state seen through `reader`.
///
/// All locations the rule mentions are read first, whatever branch the
/// evaluation later takes. With `enforce_require` unset the precondition is
/// not evaluated at all.
pub fn evaluate_rule(
    rule: &CheckedRule,
    input: &RuleInput<'_>,
    reader: &mut Reader<'_>,
    enforce_require: bool,
) -> Result<RuleOutcome, RuleError> {
    if input.params.len() != rule.params.len() {
        return Err(RuleError::Arity {
            rule: rule.name.clone(),
            expected: rule.params.len(),
            found: input.params.len(),
        });
    }
    let mut env = Env {
        rule,
        input,
        reader,
        cache: BTreeMap::new(),
    };
    for a in &rule.reads {
        env.eval(&a.to_expr())?;
    }

    let mut receives = Vec::with_capacity(rule.receives.len());
    for r in &rule.receives {
        receives.push((r.token, amount(env.eval(&r.amount)?)?));
    }
    if enforce_require && !as_bool("require", env.eval(&rule.require)?)? {
        return Err(RuleError::RequireFalse);
    }
    let mut sends = Vec::with_capacity(rule.sends.len());
    for s in &rule.sends {
        let to = match env.eval(&s.to)? {
            BVal::Str(k) => PubKey::new(&k),
            other => return Err(RuleError::BadRecipient(alloc::format!("{other:?}"))),
        };
        sends.push((to, s.token, amount(env.eval(&s.amount)?)?));
    }
    let mut writes = Vec::with_capacity(rule.writes.len());
    for (a, rhs) in &rule.writes {
        let source = env.access_key(a)?;
        let key = StateKey::new(source, input.hasher);
        writes.push((key, env.eval(rhs)?));
    }
    writes.sort_by_key(|(k, _)| k.hash);
    let mut dedup: Vec<(StateKey, BVal)> = Vec::with_capacity(writes.len());
    for (k, v) in writes {
        match dedup.last() {
            Some((pk, pv)) if pk.hash == k.hash => {
                if pk.source != k.source {
                    return Err(EvalError::Collision(pk.source.preimage(), k.source.preimage()).into());
                }
                if *pv != v {
                    return Err(RuleError::ConflictingWrite(k.hash));
                }
            }
            _ => dedup.push((k, v)),
        }
    }
    let reads = env
        .cache
        .into_iter()
        .map(|(hash, (source, v))| (StateKey { source, hash }, v))
        .collect();
    Ok(RuleOutcome {
        reads,
        receives,
        sends,
        writes: dedup,
    })
}
