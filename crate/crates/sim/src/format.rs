//! JSON sequence files and ledger size/digest measurement.

use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use blake2::{Blake2b512, Digest};
use hutxo_core::batch::Event;
use hutxo_core::{Crypto, Ledger, Output, Tx};
use serde::{Deserialize, Serialize};

/// A replayable run: the outputs minted at genesis and the events that follow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub genesis: Vec<Output>,
    pub events: Vec<Event>,
}

impl Sequence {
    pub fn ledger(&self) -> Ledger {
        Ledger::with_genesis(Arc::new(Crypto::default()), self.genesis.clone())
    }

    pub fn tx_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Event::Tx(_))).count()
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        serde_json::from_reader(io::BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = io::BufWriter::new(f);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Default)]
struct Meter {
    bytes: u64,
    hash: Option<Blake2b512>,
}

impl Write for Meter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.bytes += buf.len() as u64;
        if let Some(h) = &mut self.hash {
            h.update(buf);
        }
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

fn measure<T: Serialize + ?Sized>(v: &T, hash: bool) -> Meter {
    let mut m = Meter {
        bytes: 0,
        hash: hash.then(Blake2b512::new),
    };
    serde_json::to_writer(&mut m, v).expect("ledger values always serialize");
    m
}

/// Size of the ledger's JSON serialization.
pub fn ledger_bytes(ledger: &Ledger) -> u64 {
    measure(ledger, false).bytes
}

/// Size of a transaction's JSON serialization.
pub fn tx_bytes(tx: &Tx) -> u64 {
    measure(tx, false).bytes
}

/// Size and BLAKE2b-512 hex digest of the ledger's JSON serialization.
pub fn ledger_size_and_digest(ledger: &Ledger) -> (u64, String) {
    let m = measure(ledger, true);
    let digest = m.hash.expect("hashing requested").finalize();
    (m.bytes, hex_string(&digest))
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
