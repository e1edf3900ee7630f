use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use hutxo_core::batch::Event;
use hutxo_core::compiler::compile_deploy;
use hutxo_core::hurf::semantics::State;
use hutxo_core::hurf::{check_contract, parse_contract};
use hutxo_core::{Crypto, Ledger, Output, OutputRef, PubKey, Wallet};
use hutxo_sim::experiment::{run_experiment, write_csv, Bench};
use hutxo_sim::workload::CrowdfundMode;
use hutxo_sim::{run, Sequence};

#[derive(Parser)]
#[command(name = "hutxo", version, about = "hybrid-UTXO node simulator and hURF toolchain")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a workload, validate it and write a CSV report.
    Bench {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Worker counts to run; 0 is the sequential validator.
        #[arg(long, value_delimiter = ',', default_values_t = [0, 4])]
        threads: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// CSV destination; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a workload and write it as a JSON sequence.
    Gen {
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a JSON sequence and print the run report.
    Run {
        #[arg(long)]
        seq: PathBuf,
        /// 0 is the sequential validator.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Compile a contract into a deployable sequence.
    Compile {
        #[arg(long)]
        hurf: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Owner of the deposit paying the deployment fee.
        #[arg(long, default_value = "pubkey_deployer")]
        deployer: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Name {
    Crowdfund,
    Map,
    Multisig,
    Registry,
}

#[derive(Args)]
struct WorkloadArgs {
    name: Name,
    #[arg(long, value_enum, default_value_t = CrowdfundMode::Distributed)]
    mode: CrowdfundMode,
    #[arg(long, default_value_t = 250)]
    users: usize,
    #[arg(long, default_value_t = 10_000)]
    ops: usize,
    /// Probability that a map increment hits m[0].
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Authorized multisig users; withdrawals need n/2 signatures.
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl WorkloadArgs {
    fn bench(&self) -> anyhow::Result<Bench> {
        Ok(match self.name {
            Name::Crowdfund => Bench::Crowdfund {
                mode: self.mode,
                users: self.users.max(1),
            },
            Name::Map => {
                anyhow::ensure!((0.0..=1.0).contains(&self.p), "--p must lie in [0, 1]");
                Bench::Map { p: self.p, ops: self.ops }
            }
            Name::Multisig => {
                anyhow::ensure!(self.n >= 2 && self.n.is_multiple_of(2), "--n must be even and at least 2");
                Bench::Multisig { n: self.n, ops: self.ops }
            }
            Name::Registry => Bench::Registry {
                users: self.users.max(1),
            },
        })
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().cmd {
        Cmd::Bench {
            workload,
            threads,
            reps,
            out,
        } => {
            let rows = run_experiment(&workload.bench()?, &threads, workload.seed, reps.max(1))?;
            match out {
                Some(p) => write_csv(File::create(&p).with_context(|| format!("creating {}", p.display()))?, &rows),
                None => write_csv(io::stdout().lock(), &rows),
            }
        }
        Cmd::Gen { workload, out } => workload.bench()?.generate(workload.seed).sequence.save(&out),
        Cmd::Run { seq, threads } => {
            let seq = Sequence::load(&seq)?;
            let (_, report) = run(seq.ledger(), &seq.events, threads);
            let mut w = BufWriter::new(io::stdout().lock());
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            Ok(())
        }
        Cmd::Compile { hurf, out, deployer } => {
            let src = std::fs::read_to_string(&hurf).with_context(|| format!("reading {}", hurf.display()))?;
            let ast = parse_contract(&src).map_err(|e| anyhow::anyhow!("{}:{e}", hurf.display()))?;
            let contract = check_contract(&ast).map_err(|e| anyhow::anyhow!("{}: {e}", hurf.display()))?;
            let deployer = PubKey::new(&deployer);
            let genesis = vec![Output::deposit(deployer.clone(), Wallet::native(1))];
            let ledger = Ledger::with_genesis(Arc::new(Crypto::default()), genesis.clone());
            let state = State::initial(&contract).flatten(ledger.hasher());
            let tx = compile_deploy(&ledger, &contract, &state, OutputRef::new(0, 0), &[], vec![deployer])?;
            Sequence {
                genesis,
                events: vec![Event::Tx(tx)],
            }
            .save(&out)
        }
    }
}
