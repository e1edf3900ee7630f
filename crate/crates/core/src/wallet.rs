//! Token identifiers and multi-token wallets.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Token identifier. Token 0 is the native currency used for fees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

impl TokenId {
    pub const NATIVE: TokenId = TokenId(0);
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

/// A finite map from tokens to non-negative amounts. Zero entries are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Wallet(BTreeMap<TokenId, u64>);

impl Wallet {
    pub fn new() -> Self {
        Wallet(BTreeMap::new())
    }

    pub fn of(token: TokenId, amount: u64) -> Self {
        let mut w = Wallet::new();
        w.set(token, amount);
        w
    }

    pub fn native(amount: u64) -> Self {
        Self::of(TokenId::NATIVE, amount)
    }

    pub fn get(&self, token: TokenId) -> u64 {
        self.0.get(&token).copied().unwrap_or(0)
    }

    pub fn set(&mut self, token: TokenId, amount: u64) {
        if amount == 0 {
            self.0.remove(&token);
        } else {
            self.0.insert(token, amount);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TokenId, u64)> + '_ {
        self.0.iter().map(|(t, a)| (*t, *a))
    }

    /// Pointwise sum, `None` on overflow.
    pub fn checked_add(&self, other: &Wallet) -> Option<Wallet> {
        let mut out = self.clone();
        for (t, a) in other.iter() {
            out.set(t, out.get(t).checked_add(a)?);
        }
        Some(out)
    }

    /// Pointwise difference, `None` if any token would go below zero.
    pub fn checked_sub(&self, other: &Wallet) -> Option<Wallet> {
        let mut out = self.clone();
        for (t, a) in other.iter() {
            out.set(t, out.get(t).checked_sub(a)?);
        }
        Some(out)
    }

    /// Pointwise `self >= other`.
    pub fn covers(&self, other: &Wallet) -> bool {
        other.iter().all(|(t, a)| self.get(t) >= a)
    }

    /// Per-token `max(0, self - other)`.
    pub fn excess_over(&self, other: &Wallet) -> Wallet {
        let mut out = Wallet::new();
        for (t, a) in self.iter() {
            out.set(t, a.saturating_sub(other.get(t)));
        }
        out
    }
}

impl fmt::Debug for Wallet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Wallet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (t, a)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}:{t}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(TokenId, u64)> for Wallet {
    fn from_iter<I: IntoIterator<Item = (TokenId, u64)>>(iter: I) -> Self {
        let mut w = Wallet::new();
        for (t, a) in iter {
            w.set(t, w.get(t) + a);
        }
        w
    }
}

impl Serialize for Wallet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Wallet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(TokenId, u64)>::deserialize(d)?;
        let mut w = Wallet::new();
        for (t, a) in pairs {
            let sum = w
                .get(t)
                .checked_add(a)
                .ok_or_else(|| serde::de::Error::custom("wallet amount overflow"))?;
            w.set(t, sum);
        }
        Ok(w)
    }
}
