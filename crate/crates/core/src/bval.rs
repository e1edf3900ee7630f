//! Base values of hURF: booleans, unbounded integers and strings.

use alloc::string::{String, ToString};
use core::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A hURF base value. The default value of any state location is `Int(0)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "Repr", try_from = "Repr")]
pub enum BVal {
    Bool(bool),
    Int(BigInt),
    Str(String),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Repr {
    Bool(bool),
    Int(String),
    Str(String),
}

impl From<BVal> for Repr {
    fn from(v: BVal) -> Repr {
        match v {
            BVal::Bool(b) => Repr::Bool(b),
            BVal::Int(n) => Repr::Int(n.to_string()),
            BVal::Str(s) => Repr::Str(s),
        }
    }
}

impl TryFrom<Repr> for BVal {
    type Error = num_bigint::ParseBigIntError;

    fn try_from(r: Repr) -> Result<BVal, Self::Error> {
        Ok(match r {
            Repr::Bool(b) => BVal::Bool(b),
            Repr::Int(s) => BVal::Int(s.parse()?),
            Repr::Str(s) => BVal::Str(s),
        })
    }
}

impl BVal {
    pub fn zero() -> BVal {
        BVal::Int(BigInt::zero())
    }

    pub fn int(n: i64) -> BVal {
        BVal::Int(BigInt::from(n))
    }

    pub fn str(s: &str) -> BVal {
        BVal::Str(s.into())
    }

    /// True for the default value `0`. `false` and `""` are not default.
    pub fn is_default(&self) -> bool {
        matches!(self, BVal::Int(n) if n.is_zero())
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            BVal::Int(n) => n.to_u64(),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            BVal::Bool(_) => "bool",
            BVal::Int(_) => "int",
            BVal::Str(_) => "string",
        }
    }
}

/// `toStr` rendering: decimal integers, `true`/`false`, strings verbatim.
impl fmt::Display for BVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BVal::Bool(b) => write!(f, "{b}"),
            BVal::Int(n) => write!(f, "{n}"),
            BVal::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for BVal {
    fn from(n: i64) -> BVal {
        BVal::int(n)
    }
}

impl From<u64> for BVal {
    fn from(n: u64) -> BVal {
        BVal::Int(BigInt::from(n))
    }
}

impl From<bool> for BVal {
    fn from(b: bool) -> BVal {
        BVal::Bool(b)
    }
}

impl From<&str> for BVal {
    fn from(s: &str) -> BVal {
        BVal::str(s)
    }
}

impl From<String> for BVal {
    fn from(s: String) -> BVal {
        BVal::Str(s)
    }
}
