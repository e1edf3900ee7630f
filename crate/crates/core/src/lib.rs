//! Hybrid-UTXO ledger model and the hURF contract toolchain.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and the thread pool live in the `hutxo-sim` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod batch;
pub mod bval;
pub mod centralized;
pub mod codec;
pub mod compiler;
pub mod encode;
pub mod hash;
pub mod hurf;
pub mod ledger;
pub mod script;
pub mod wallet;

pub use bval::BVal;
pub use hash::{Blake2b, Crypto, Hash512, KeyHasher, TableHasher};
pub use ledger::{CtrId, Input, Ledger, Output, OutputRef, PubKey, TimeInterval, Tx};
pub use script::{Datum, Script};
pub use wallet::{TokenId, Wallet};
