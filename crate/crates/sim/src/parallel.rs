//! Batch validation on a worker pool.

use std::time::{Duration, Instant};

use hutxo_core::batch::{validate_batched, validate_sequential, Event, RunStats};
use hutxo_core::Ledger;
use rayon::prelude::*;
use serde::Serialize;

use crate::format::ledger_size_and_digest;

/// Outcome of validating a sequence.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    /// 0 for the sequential validator.
    pub threads: usize,
    pub stats: RunStats,
    #[serde(with = "millis")]
    pub wall_time: Duration,
    pub ledger_bytes: u64,
    pub digest: String,
}

impl RunReport {
    /// `None` for the sequential validator, which builds no batches.
    pub fn soft_conflict_fraction(&self) -> Option<f64> {
        (self.threads > 0).then(|| self.stats.soft_conflict_fraction())
    }
}

mod millis {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }
}

/// Validates `events` with `threads` workers; 0 selects the sequential validator.
pub fn validate_parallel(ledger: &mut Ledger, events: &[Event], threads: usize) -> RunStats {
    if threads == 0 {
        return validate_sequential(ledger, events);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("building the worker pool");
    pool.install(|| {
        validate_batched(ledger, events, |snapshot, batch| {
            batch
                .par_iter()
                .map(|(tx, available)| snapshot.validate_tx_with(tx, *available))
                .collect()
        })
    })
}

/// Validates `events` on `ledger`, timing the validation only.
pub fn run(mut ledger: Ledger, events: &[Event], threads: usize) -> (Ledger, RunReport) {
    let start = Instant::now();
    let stats = validate_parallel(&mut ledger, events, threads);
    let wall_time = start.elapsed();
    let (ledger_bytes, digest) = ledger_size_and_digest(&ledger);
    let report = RunReport {
        threads,
        stats,
        wall_time,
        ledger_bytes,
        digest,
    };
    (ledger, report)
}
