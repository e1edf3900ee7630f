//! 512-bit hash values, the pluggable hash provider and the fixed signature check.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use blake2::{Blake2b512, Digest};
use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A 512-bit hash, ordered as a big-endian byte string.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hash512(pub [u8; 64]);

impl Hash512 {
    /// Lower sentinel of the key space. Never produced as a key.
    pub const MIN: Hash512 = Hash512([0; 64]);
    /// Upper sentinel of the key space. Never produced as a key.
    pub const MAX: Hash512 = Hash512([0xff; 64]);

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        let mut out = [0u8; 64];
        hex::decode_to_slice(s, &mut out)?;
        Ok(Hash512(out))
    }

    /// Builds a hash whose first eight bytes are `n` big-endian and the rest zero.
    /// Handy for hand-written test fixtures.
    pub fn from_u64(n: u64) -> Self {
        let mut out = [0u8; 64];
        out[..8].copy_from_slice(&n.to_be_bytes());
        Hash512(out)
    }

    /// True when the hash lies strictly inside `(MIN, MAX)`.
    pub fn is_interior(&self) -> bool {
        *self != Self::MIN && *self != Self::MAX
    }
}

impl fmt::Debug for Hash512 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::MIN {
            return f.write_str("min_H");
        }
        if *self == Self::MAX {
            return f.write_str("max_H");
        }
        write!(f, "{}..", hex::encode(&self.0[..8]))
    }
}

impl fmt::Display for Hash512 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Hash512 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Hash512 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Hash512::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Hash provider used for state keys, contract ids and the `hash` builtin.
pub trait KeyHasher: Send + Sync + fmt::Debug {
    fn hash(&self, data: &[u8]) -> Hash512;
}

/// BLAKE2b-512.
#[derive(Clone, Copy, Debug, Default)]
pub struct Blake2b;

impl KeyHasher for Blake2b {
    fn hash(&self, data: &[u8]) -> Hash512 {
        let mut out = [0u8; 64];
        out.copy_from_slice(&Blake2b512::digest(data));
        Hash512(out)
    }
}

/// A hasher with a fixed table of preimages, falling back to BLAKE2b.
///
/// Tests use it to pin the relative order of particular state keys.
#[derive(Clone, Debug, Default)]
pub struct TableHasher {
    table: BTreeMap<Vec<u8>, Hash512>,
}

impl TableHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, preimage: impl AsRef<[u8]>, value: Hash512) -> Self {
        self.insert(preimage, value);
        self
    }

    pub fn insert(&mut self, preimage: impl AsRef<[u8]>, value: Hash512) {
        self.table.insert(preimage.as_ref().to_vec(), value);
    }
}

impl KeyHasher for TableHasher {
    fn hash(&self, data: &[u8]) -> Hash512 {
        match self.table.get(data) {
            Some(h) => *h,
            None => Blake2b.hash(data),
        }
    }
}

const SIGNED_MESSAGE: &[u8] = b"hutxo fixed signature message";

/// One Ed25519 signature over a fixed message.
///
/// The simulator does not manage real keys: every required signer costs one
/// verification of this signature.
#[derive(Clone, Debug)]
pub struct FixedSignature {
    key: VerifyingKey,
    signature: Signature,
}

impl FixedSignature {
    pub fn new() -> Self {
        let signing = SigningKey::from_bytes(&[7u8; 32]);
        let signature = signing.sign(SIGNED_MESSAGE);
        FixedSignature {
            key: signing.verifying_key(),
            signature,
        }
    }

    pub fn verify(&self) -> bool {
        let key = core::hint::black_box(&self.key);
        let msg = core::hint::black_box(SIGNED_MESSAGE);
        let sig = core::hint::black_box(&self.signature);
        key.verify(msg, sig).is_ok()
    }
}

impl Default for FixedSignature {
    fn default() -> Self {
        Self::new()
    }
}

/// Cryptographic providers shared by a ledger and its scripts.
#[derive(Clone, Debug)]
pub struct Crypto {
    pub hasher: Arc<dyn KeyHasher>,
    pub signature: FixedSignature,
}

impl Crypto {
    pub fn with_hasher(hasher: Arc<dyn KeyHasher>) -> Self {
        Crypto {
            hasher,
            signature: FixedSignature::new(),
        }
    }
}

impl Default for Crypto {
    fn default() -> Self {
        Self::with_hasher(Arc::new(Blake2b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blake2b_known_vector() {
        // BLAKE2b-512("abc") from RFC 7693 appendix A.
        let h = Blake2b.hash(b"abc");
        assert_eq!(
            h.to_hex(),
            "ba80a53f981c4d0d6a2797b69f12f6e94c212f14685ac4b74b12bb6fdbffa2d1\
             7d87c5392aab792dc252d5de4533cc9518d38aa8dbf1925ab92386edd4009923"
        );
    }

    #[test]
    fn table_falls_back_to_blake2b() {
        let t = TableHasher::new().with("var_x", Hash512::from_u64(5));
        assert_eq!(t.hash(b"var_x"), Hash512::from_u64(5));
        assert_eq!(t.hash(b"var_y"), Blake2b.hash(b"var_y"));
    }

    #[test]
    fn sentinels_order() {
        let h = Blake2b.hash(b"var_x");
        assert!(Hash512::MIN < h && h < Hash512::MAX);
        assert!(h.is_interior());
        assert!(!Hash512::MAX.is_interior());
    }

    #[test]
    fn hex_round_trip() {
        let h = Blake2b.hash(b"map_m[14]");
        assert_eq!(Hash512::from_hex(&h.to_hex()).unwrap(), h);
    }

    #[test]
    fn fixed_signature_verifies() {
        assert!(FixedSignature::new().verify());
    }
}
