//! Canonical byte encoding fed to the hash function.
//!
//! Integers are big-endian, variable-length data is prefixed by a `u32`
//! big-endian length, and base values carry a one-byte tag.

use alloc::vec::Vec;

use num_bigint::Sign;

use crate::bval::BVal;
use crate::ledger::OutputRef;

#[derive(Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.u32(b.len() as u32);
        self.buf.extend_from_slice(b);
        self
    }

    pub fn bval(&mut self, v: &BVal) -> &mut Self {
        match v {
            BVal::Bool(b) => {
                self.buf.push(0);
                self.buf.push(*b as u8);
            }
            BVal::Int(n) => {
                self.buf.push(1);
                let (sign, mag) = n.to_bytes_be();
                self.buf.push(match sign {
                    Sign::Minus => 1,
                    _ => 0,
                });
                let mag = if sign == Sign::NoSign { Vec::new() } else { mag };
                self.bytes(&mag);
            }
            BVal::Str(s) => {
                self.buf.push(2);
                self.bytes(s.as_bytes());
            }
        }
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

/// Encoding of an output reference: `txId` then `index`, both as `u64`.
pub fn output_ref(r: &OutputRef) -> Vec<u8> {
    let mut e = Encoder::new();
    e.u64(r.tx).u64(r.index as u64);
    e.finish()
}

/// Encoding of a tuple of base values: element count, then each value.
pub fn bval_tuple(vals: &[BVal]) -> Vec<u8> {
    let mut e = Encoder::new();
    e.u32(vals.len() as u32);
    for v in vals {
        e.bval(v);
    }
    e.finish()
}
