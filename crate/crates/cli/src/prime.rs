use clap::{Args, Subcommand};
use primewin::Result;

use crate::exit::Outcome;
use crate::output::Out;
use crate::{cache, Globals};

#[derive(Subcommand, Debug)]
pub enum PrimeCommand {
    /// Print p_n.
    Nth { n: u64 },
    /// Print the index n with p_n = p.
    Index { p: u64 },
    /// Print p_n, ..., p_{n+m} separated by spaces.
    Window(WindowArgs),
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: u64,
}

pub fn run(globals: &Globals, cmd: PrimeCommand) -> Result<Outcome> {
    let mut indexer = cache::open_indexer(globals.bound);
    let line = match cmd {
        PrimeCommand::Nth { n } => indexer.nth_prime(n)?.to_string(),
        PrimeCommand::Index { p } => indexer.index_of_prime(p)?.to_string(),
        PrimeCommand::Window(w) => {
            let window = indexer.window_at(w.n, w.m)?;
            let primes: Vec<String> = window.primes().iter().map(u64::to_string).collect();
            primes.join(" ")
        }
    };
    Out::new().line(&line)?;
    cache::store_indexer(&indexer);
    Ok(Outcome::Success)
}
