//! Timed benchmark runs and their CSV report.

use std::io::Write;

use anyhow::bail;
use serde::Serialize;

use crate::parallel::{run, RunReport};
use crate::workload::{gen_crowdfund, gen_map, gen_multisig, gen_registry, CrowdfundMode, Workload};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bench {
    Crowdfund { mode: CrowdfundMode, users: usize },
    Map { p: f64, ops: usize },
    Multisig { n: usize, ops: usize },
    Registry { users: usize },
}

impl Bench {
    pub fn name(&self) -> &'static str {
        match self {
            Bench::Crowdfund { .. } => "crowdfund",
            Bench::Map { .. } => "map",
            Bench::Multisig { .. } => "multisig",
            Bench::Registry { .. } => "registry",
        }
    }

    /// The parameter that is not the size: crowdfund mode, map bias or
    /// multisig user count.
    pub fn mode(&self) -> String {
        match self {
            Bench::Crowdfund { mode, .. } => mode.name().into(),
            Bench::Map { p, .. } => format!("p={p}"),
            Bench::Multisig { n, .. } => format!("n={n}"),
            Bench::Registry { .. } => "distributed".into(),
        }
    }

    pub fn size(&self) -> usize {
        match *self {
            Bench::Crowdfund { users, .. } | Bench::Registry { users } => users,
            Bench::Map { ops, .. } | Bench::Multisig { ops, .. } => ops,
        }
    }

    pub fn generate(&self, seed: u64) -> Workload {
        match *self {
            Bench::Crowdfund { mode, users } => gen_crowdfund(mode, users, seed),
            Bench::Map { p, ops } => gen_map(p, ops, seed),
            Bench::Multisig { n, ops } => gen_multisig(n, ops, seed),
            Bench::Registry { users } => gen_registry(users, seed),
        }
    }
}

/// One CSV line.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub benchmark: &'static str,
    pub mode: String,
    pub size: usize,
    /// 0 is the sequential validator.
    pub threads: usize,
    pub seed: u64,
    /// Repetition number, or `mean`.
    pub rep: String,
    pub wall_ms: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Empty for the sequential validator.
    pub soft_conflict_pct: Option<f64>,
    pub ledger_bytes: u64,
    pub final_digest: String,
}

impl Row {
    fn new(bench: &Bench, seed: u64, rep: String, r: &RunReport) -> Self {
        Row {
            benchmark: bench.name(),
            mode: bench.mode(),
            size: bench.size(),
            threads: r.threads,
            seed,
            rep,
            wall_ms: r.wall_time.as_secs_f64() * 1e3,
            accepted: r.stats.accepted,
            rejected: r.stats.rejected,
            soft_conflict_pct: r.soft_conflict_fraction().map(|f| f * 100.0),
            ledger_bytes: r.ledger_bytes,
            final_digest: r.digest.clone(),
        }
    }
}

/// Generates the workload once and validates it `reps` times with each
/// thread count. Fails if two runs end in different ledgers.
pub fn run_experiment(bench: &Bench, threads: &[usize], seed: u64, reps: usize) -> anyhow::Result<Vec<Row>> {
    let w = bench.generate(seed);
    let mut rows = Vec::new();
    for &t in threads {
        let mut wall = 0.0;
        let mut last = None;
        for rep in 0..reps {
            let (_, report) = run(w.ledger(), w.events(), t);
            let row = Row::new(bench, seed, rep.to_string(), &report);
            wall += row.wall_ms;
            rows.push(row);
            last = Some(report);
        }
        if let Some(r) = last {
            let mut mean = Row::new(bench, seed, "mean".into(), &r);
            mean.wall_ms = wall / reps as f64;
            rows.push(mean);
        }
    }
    if let Some(first) = rows.first() {
        if let Some(odd) = rows.iter().find(|r| r.final_digest != first.final_digest) {
            bail!(
                "final ledgers differ: {} threads gave {}, {} threads gave {}",
                first.threads,
                first.final_digest,
                odd.threads,
                odd.final_digest
            );
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
