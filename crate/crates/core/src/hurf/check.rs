//! Static well-definedness: name resolution, arities and single assignment.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ast::*;
use crate::bval::BVal;
use crate::wallet::TokenId;

/// A symbolic state location: a variable, or a map at index expressions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Access {
    Var(String),
    Map(String, Vec<Expr>),
}

impl Access {
    /// The expression reading this location.
    pub fn to_expr(&self) -> Expr {
        match self {
            Access::Var(v) => Expr::Name(v.clone()),
            Access::Map(m, args) => Expr::Index {
                map: m.clone(),
                args: args.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SendPlan {
    pub to: Expr,
    pub amount: Expr,
    pub token: TokenId,
}

/// A rule ready for evaluation.
///
/// `require` already includes the implicit distinctness conditions of map
/// writes; `writes` has duplicate identical variable assignments removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckedRule {
    pub contract: String,
    pub name: String,
    pub params: Vec<String>,
    pub receives: Vec<Receive>,
    pub require: Expr,
    pub sends: Vec<SendPlan>,
    pub writes: Vec<(Access, Expr)>,
    /// Every state location read by the rule, in order of first appearance.
    pub reads: Vec<Access>,
}

impl CheckedRule {
    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckedContract {
    pub source: Contract,
    pub rules: Vec<Arc<CheckedRule>>,
}

impl CheckedContract {
    pub fn rule(&self, name: &str) -> Option<(usize, &Arc<CheckedRule>)> {
        self.rules.iter().enumerate().find(|(_, r)| r.name == name)
    }

    /// Declared initial values; undeclared initial values are 0.
    pub fn initial_vars(&self) -> impl Iterator<Item = (&str, BVal)> + '_ {
        self.source
            .vars
            .iter()
            .map(|v| (v.name.as_str(), v.init.clone().unwrap_or_else(BVal::zero)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("duplicate declaration of `{0}`")]
    DuplicateDeclaration(String),
    #[error("duplicate rule `{0}`")]
    DuplicateRule(String),
    #[error("rule `{rule}`: duplicate parameter `{param}`")]
    DuplicateParam { rule: String, param: String },
    #[error("rule `{rule}`: parameter `{param}` shadows a state name")]
    ParamShadowsState { rule: String, param: String },
    #[error("rule `{rule}`: unknown identifier `{name}`")]
    Unknown { rule: String, name: String },
    #[error("rule `{rule}`: `{name}` is a map and needs an index")]
    MapWithoutIndex { rule: String, name: String },
    #[error("rule `{rule}`: `{name}` is not a map")]
    NotAMap { rule: String, name: String },
    #[error("rule `{rule}`: map `{name}` has arity {expected}, used with {found}")]
    Arity {
        rule: String,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("rule `{rule}`: `{name}` is not an assignable variable")]
    NotAVariable { rule: String, name: String },
    #[error("rule `{rule}`: `{name}` is assigned twice with different values")]
    ConflictingAssignment { rule: String, name: String },
}

enum Kind {
    Var,
    Map(usize),
}

struct Scope<'a> {
    rule: &'a str,
    state: &'a BTreeMap<&'a str, Kind>,
    params: &'a [String],
}

impl Scope<'_> {
    fn expr(&self, e: &Expr) -> Result<(), CheckError> {
        let mut err = None;
        e.visit(&mut |x| {
            if err.is_some() {
                return;
            }
            err = self.node(x).err();
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn node(&self, e: &Expr) -> Result<(), CheckError> {
        match e {
            Expr::Name(n) => {
                if self.params.contains(n) {
                    return Ok(());
                }
                match self.state.get(n.as_str()) {
                    Some(Kind::Var) => Ok(()),
                    Some(Kind::Map(_)) => Err(CheckError::MapWithoutIndex {
                        rule: self.rule.into(),
                        name: n.clone(),
                    }),
                    None => Err(CheckError::Unknown {
                        rule: self.rule.into(),
                        name: n.clone(),
                    }),
                }
            }
            Expr::Index { map, args } => self.map(map, args.len()),
            _ => Ok(()),
        }
    }

    fn map(&self, name: &str, found: usize) -> Result<(), CheckError> {
        match self.state.get(name) {
            Some(Kind::Map(arity)) if *arity == found => Ok(()),
            Some(Kind::Map(arity)) => Err(CheckError::Arity {
                rule: self.rule.into(),
                name: name.into(),
                expected: *arity,
                found,
            }),
            Some(Kind::Var) => Err(CheckError::NotAMap {
                rule: self.rule.into(),
                name: name.into(),
            }),
            None if self.params.iter().any(|p| p == name) => Err(CheckError::NotAMap {
                rule: self.rule.into(),
                name: name.into(),
            }),
            None => Err(CheckError::Unknown {
                rule: self.rule.into(),
                name: name.into(),
            }),
        }
    }
}

pub fn check_contract(c: &Contract) -> Result<CheckedContract, CheckError> {
    let mut state = BTreeMap::new();
    for v in &c.vars {
        if state.insert(v.name.as_str(), Kind::Var).is_some() {
            return Err(CheckError::DuplicateDeclaration(v.name.clone()));
        }
    }
    for m in &c.maps {
        if state.insert(m.name.as_str(), Kind::Map(m.arity)).is_some() {
            return Err(CheckError::DuplicateDeclaration(m.name.clone()));
        }
    }
    let mut rules = Vec::new();
    for (i, r) in c.rules.iter().enumerate() {
        if c.rules[..i].iter().any(|o| o.name == r.name) {
            return Err(CheckError::DuplicateRule(r.name.clone()));
        }
        rules.push(Arc::new(check_rule(&c.name, r, &state)?));
    }
    Ok(CheckedContract {
        source: c.clone(),
        rules,
    })
}

fn check_rule(contract: &str, r: &Rule, state: &BTreeMap<&str, Kind>) -> Result<CheckedRule, CheckError> {
    for (i, p) in r.params.iter().enumerate() {
        if r.params[..i].contains(p) {
            return Err(CheckError::DuplicateParam {
                rule: r.name.clone(),
                param: p.clone(),
            });
        }
        if state.contains_key(p.as_str()) {
            return Err(CheckError::ParamShadowsState {
                rule: r.name.clone(),
                param: p.clone(),
            });
        }
    }
    let scope = Scope {
        rule: &r.name,
        state,
        params: &r.params,
    };
    for rc in &r.receives {
        scope.expr(&rc.amount)?;
    }
    if let Some(e) = &r.require {
        scope.expr(e)?;
    }

    let mut sends = Vec::new();
    let mut var_writes: Vec<(String, Expr)> = Vec::new();
    let mut map_writes: Vec<(String, Vec<Expr>, Expr)> = Vec::new();
    for st in &r.effects {
        match st {
            Stmt::Assign { var, value } => {
                if !matches!(state.get(var.as_str()), Some(Kind::Var)) {
                    return Err(CheckError::NotAVariable {
                        rule: r.name.clone(),
                        name: var.clone(),
                    });
                }
                scope.expr(value)?;
                match var_writes.iter().find(|(v, _)| v == var) {
                    Some((_, prev)) if prev == value => {}
                    Some(_) => {
                        return Err(CheckError::ConflictingAssignment {
                            rule: r.name.clone(),
                            name: var.clone(),
                        })
                    }
                    None => var_writes.push((var.clone(), value.clone())),
                }
            }
            Stmt::MapAssign { map, index, value } => {
                scope.map(map, index.len())?;
                for e in index {
                    scope.expr(e)?;
                }
                scope.expr(value)?;
                map_writes.push((map.clone(), index.clone(), value.clone()));
            }
            Stmt::Send { to, amount, token } => {
                scope.expr(to)?;
                scope.expr(amount)?;
                sends.push(SendPlan {
                    to: to.clone(),
                    amount: amount.clone(),
                    token: *token,
                });
            }
        }
    }

    // Two writes to the same map must hit distinct points unless they agree.
    let mut conjuncts = Vec::new();
    for (i, (m1, idx1, v1)) in map_writes.iter().enumerate() {
        for (m2, idx2, v2) in &map_writes[i + 1..] {
            if m1 != m2 || v1 == v2 {
                continue;
            }
            let mut same = None;
            for (a, b) in idx1.iter().zip(idx2) {
                let eq = Expr::bin(BinOp::Eq, a.clone(), b.clone());
                same = Some(match same {
                    None => eq,
                    Some(acc) => Expr::bin(BinOp::And, acc, eq),
                });
            }
            conjuncts.push(Expr::not(same.expect("maps have arity >= 1")));
        }
    }
    let mut require = r.require.clone();
    for c in conjuncts {
        require = Some(match require {
            None => c,
            Some(acc) => Expr::bin(BinOp::And, acc, c),
        });
    }
    let require = require.unwrap_or(Expr::Const(BVal::Bool(true)));

    let mut writes: Vec<(Access, Expr)> = var_writes
        .into_iter()
        .map(|(v, e)| (Access::Var(v), e))
        .collect();
    writes.extend(
        map_writes
            .into_iter()
            .map(|(m, idx, e)| (Access::Map(m, idx), e)),
    );
    // Keep the original statement order.
    let order = |a: &Access| {
        r.effects.iter().position(|st| match (st, a) {
            (Stmt::Assign { var, .. }, Access::Var(v)) => var == v,
            (Stmt::MapAssign { map, index, .. }, Access::Map(m, idx)) => map == m && index == idx,
            _ => false,
        })
    };
    writes.sort_by_key(|(a, _)| order(a));

    let mut reads: Vec<Access> = Vec::new();
    let mut collect = |e: &Expr| {
        e.visit(&mut |x| {
            let a = match x {
                Expr::Name(n) if !r.params.contains(n) => Access::Var(n.clone()),
                Expr::Index { map, args } => Access::Map(map.clone(), args.clone()),
                _ => return,
            };
            if !reads.contains(&a) {
                reads.push(a);
            }
        })
    };
    if let Some(e) = &r.require {
        collect(e);
    }
    for rc in &r.receives {
        collect(&rc.amount);
    }
    for st in &r.effects {
        match st {
            Stmt::Assign { value, .. } => collect(value),
            Stmt::MapAssign { index, value, .. } => {
                for e in index {
                    collect(e);
                }
                collect(value);
            }
            Stmt::Send { to, amount, .. } => {
                collect(to);
                collect(amount);
            }
        }
    }

    Ok(CheckedRule {
        contract: contract.into(),
        name: r.name.clone(),
        params: r.params.clone(),
        receives: r.receives.clone(),
        require,
        sends,
        writes,
        reads,
    })
}
