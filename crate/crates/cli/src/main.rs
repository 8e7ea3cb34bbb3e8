//! `primewin`: searches for sign and primitive-root patterns in windows of
//! consecutive primes, admissible-set constructions, residue certificates
//! and progression scans.

mod admissible;
mod cache;
mod certificate;
mod exit;
mod output;
mod prime;
mod progress;
mod search;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exit::Outcome;

#[derive(Parser, Debug)]
#[command(
    name = "primewin",
    version,
    about = "Legendre-symbol patterns in consecutive primes"
)]
struct Cli {
    /// Largest value the prime sieve may reach.
    #[arg(long, global = true, default_value_t = primewin::primes::DEFAULT_BOUND)]
    bound: u64,

    /// Suppress progress output on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find indices n whose window p_n, ..., p_{n+m} satisfies a pattern.
    Search(search::SearchArgs),
    /// Build and verify an admissible set with private large-prime divisors.
    Admissible(admissible::AdmissibleArgs),
    /// Build, verify or scan residue certificates.
    #[command(subcommand)]
    Certificate(certificate::CertificateCommand),
    /// Prime lookups by index.
    #[command(subcommand)]
    Prime(prime::PrimeCommand),
}

/// Flags shared by commands that run worker pools.
#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    workers: Option<usize>,

    /// Stop after this many seconds, writing the checkpoint if one is set.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,

    /// Resume from and keep updating this checkpoint file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

impl RunArgs {
    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

pub struct Globals {
    pub bound: u64,
    pub quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = Globals {
        bound: cli.bound,
        quiet: cli.quiet,
    };
    let outcome = match cli.command {
        Command::Search(args) => search::run(&globals, args),
        Command::Admissible(args) => admissible::run(args),
        Command::Certificate(cmd) => certificate::run(&globals, cmd),
        Command::Prime(cmd) => prime::run(&globals, cmd),
    };
    match outcome {
        Ok(o) => o.into(),
        Err(e) => {
            eprintln!("error: {e}");
            Outcome::from_error(&e).into()
        }
    }
}
