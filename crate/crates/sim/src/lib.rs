//! Node simulator for the hybrid-UTXO ledger: sequence files, a parallel
//! validator, the benchmark workloads and their experiments.

pub mod experiment;
pub mod format;
pub mod parallel;
pub mod workload;

pub use experiment::{run_experiment, Bench, Row};
pub use format::Sequence;
pub use parallel::{run, validate_parallel, RunReport};
