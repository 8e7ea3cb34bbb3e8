use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use clap::Args;
use primewin::pattern::{
    write_bfile_line, MatchRecord, MatchStream, OutputFormat, Predicate, SearchCheckpoint,
    SearchConfig, SignPattern,
};
use primewin::{Error, Result};

use crate::exit::Outcome;
use crate::output::Out;
use crate::progress::{deadline, interrupt_flag, Reporter};
use crate::{cache, Globals, RunArgs};

const CHECKPOINT_EVERY: Duration = Duration::from_secs(5);

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Window size: the window holds m + 1 consecutive primes. Optional for
    /// matrix patterns, which fix it.
    #[arg(long)]
    m: Option<usize>,

    /// `++`, `--`, `-+`, `+-`, `primroot`, `strict:<signs>` or
    /// `matrix:<file>`.
    #[arg(long, allow_hyphen_values = true)]
    pattern: String,

    /// Also require a prime p > 2m + 1 exactly dividing every difference.
    #[arg(long)]
    strict: bool,

    /// First starting index to consider.
    #[arg(long)]
    min_n: Option<u64>,

    /// Last starting index to consider.
    #[arg(long)]
    max_n: Option<u64>,

    /// Stop at the first match (the default).
    #[arg(long, conflicts_with_all = ["all", "limit"])]
    first: bool,

    /// Report every match in range.
    #[arg(long, conflicts_with = "limit")]
    all: bool,

    /// Stop after this many matches, counting those already in the checkpoint.
    #[arg(long)]
    limit: Option<usize>,

    /// jsonl, csv or bfile (`<k> <n>` for the k-th match).
    #[arg(long, default_value = "jsonl")]
    format: String,

    #[command(flatten)]
    run: RunArgs,
}

fn parse_predicate(spec: &str, strict: bool) -> Result<Predicate> {
    let predicate = match spec.strip_prefix("matrix:") {
        Some(file) => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| Error::Io(format!("cannot read matrix file {file}: {e}")))?;
            Predicate::Signs(SignPattern::parse_matrix_file(&text)?)
        }
        None => spec.parse()?,
    };
    Ok(match (predicate, strict) {
        (Predicate::Signs(p), true) => Predicate::SignsStrict(p),
        (Predicate::PrimRoot, true) => {
            return Err(Error::invalid("--strict applies to sign patterns only"))
        }
        (p, _) => p,
    })
}

fn load_or_new(path: &Path, predicate: &Predicate, m: usize) -> Result<SearchCheckpoint> {
    if !path.exists() {
        return Ok(SearchCheckpoint::new(predicate, m));
    }
    let ckpt = SearchCheckpoint::load(path)?;
    ckpt.check_compatible(predicate, m)?;
    Ok(ckpt)
}

/// Checkpoint shared between the main loop and the progress hook.
struct CheckpointSink {
    path: PathBuf,
    state: SearchCheckpoint,
    base_matches: u64,
    last_write: Instant,
}

impl CheckpointSink {
    fn write(&mut self, scanned_through: u64, run_matches: usize) {
        self.state.last_n_scanned = self.state.last_n_scanned.max(scanned_through);
        self.state.matches_found = self.base_matches + run_matches as u64;
        self.last_write = Instant::now();
        if let Err(e) = self.state.save(&self.path) {
            eprintln!(
                "warning: could not write checkpoint {}: {e}",
                self.path.display()
            );
        }
    }
}

pub fn run(globals: &Globals, args: SearchArgs) -> Result<Outcome> {
    let predicate = parse_predicate(&args.pattern, args.strict)?;
    let fixed_m = predicate.sign_pattern().and_then(SignPattern::fixed_m);
    let m = match (args.m, fixed_m) {
        (Some(m), _) => m,
        (None, Some(m)) => m,
        (None, None) => return Err(Error::invalid("--m is required for this pattern")),
    };
    let format: OutputFormat = args.format.parse()?;

    let ckpt = match &args.run.checkpoint {
        Some(path) => Some(load_or_new(path, &predicate, m)?),
        None => None,
    };
    let base_matches = ckpt.as_ref().map_or(0, |c| c.matches_found);
    let mut n_start = args.min_n.unwrap_or(predicate.min_n());
    if let Some(c) = &ckpt {
        n_start = n_start.max(c.resume_from());
    }
    let limit = if args.all {
        None
    } else {
        let total = args.limit.unwrap_or(1) as u64;
        Some(total.saturating_sub(base_matches) as usize)
    };
    if limit == Some(0) || args.max_n.is_some_and(|e| n_start > e) {
        if !globals.quiet {
            eprintln!("nothing left to scan");
        }
        return Ok(Outcome::Success);
    }

    let cfg = SearchConfig::new(m, predicate)
        .n_start(n_start)
        .n_end(args.max_n)
        .limit(limit)
        .workers(args.run.workers());
    let mut indexer = cache::open_indexer(globals.bound);
    let sink = args.run.checkpoint.clone().zip(ckpt).map(|(path, state)| {
        Arc::new(Mutex::new(CheckpointSink {
            path,
            state,
            base_matches,
            last_write: Instant::now(),
        }))
    });

    let mut reporter = Reporter::new(globals.quiet, n_start);
    let hook_sink = sink.clone();
    let mut seen_matches = 0;
    let mut stream = MatchStream::new(cfg, &mut indexer)?
        .with_cancel(interrupt_flag())
        .with_progress(move |p| {
            reporter.report(p.scanned_through, p.matches, "matches");
            // A batch that produced matches is checkpointed by the main loop
            // once those matches are printed.
            if p.matches != seen_matches {
                seen_matches = p.matches;
                return;
            }
            if let Some(sink) = &hook_sink {
                let mut sink = sink.lock().unwrap();
                if sink.last_write.elapsed() >= CHECKPOINT_EVERY {
                    sink.write(p.scanned_through, p.matches);
                }
            }
        });
    if let Some(d) = deadline(args.run.time_limit) {
        stream = stream.with_deadline(d);
    }

    let mut out = Out::new();
    if format == OutputFormat::Csv && base_matches == 0 {
        out.line(MatchRecord::CSV_HEADER)?;
    }
    let mut printed = 0u64;
    let mut failure = None;
    let mut reader_gone = false;
    while let Some(item) = stream.next() {
        let record = match item {
            Ok(r) => r,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let line = match format {
            OutputFormat::Jsonl => record.to_json_line(),
            OutputFormat::Csv => record.to_csv_row(),
            OutputFormat::Bfile => write_bfile_line(base_matches + printed + 1, record.n),
        };
        if !out.line(&line)? {
            reader_gone = true;
            break;
        }
        printed += 1;
        if let Some(sink) = &sink {
            let mut sink = sink.lock().unwrap();
            sink.state.last_match = Some(record.n);
            if stream.buffered() == 0 {
                sink.write(stream.scanned_through(), stream.matches_found());
            } else {
                sink.write(record.n, printed as usize);
            }
        }
    }
    drop(out);

    // Matches decided after the reader hung up were never printed, so the
    // checkpoint stays at the last printed one.
    if let (Some(sink), false) = (&sink, reader_gone) {
        sink.lock()
            .unwrap()
            .write(stream.scanned_through(), stream.matches_found());
    }
    cache::store_indexer(&indexer);
    if !globals.quiet {
        eprintln!(
            "scanned through n = {}, {} match(es) this run",
            stream.scanned_through(),
            printed
        );
    }
    if let Some(e) = failure {
        return Err(e);
    }
    if stream.interrupted() {
        eprintln!("interrupted at n = {}", stream.scanned_through());
        return Ok(Outcome::Interrupted);
    }
    Ok(Outcome::Success)
}
