use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use primewin::admissible::{verify_properties, AdmissibleSet, Variant};
use primewin::certificate::{
    build_certificate, scan_progression_with, verify_certificate, CertParams, CertVariant,
    Certificate, Cutoff, PrimalityMode, ScanConfig, ScanStats,
};
use primewin::{Error, Report, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exit::Outcome;
use crate::output::Out;
use crate::progress::{deadline, interrupt_flag, Reporter};
use crate::{Globals, RunArgs};

/// Indices scanned between checkpoint writes.
const SCAN_SLICE: u64 = 1 << 18;
const SCAN_CHECKPOINT_VERSION: u32 = 1;

#[derive(Subcommand, Debug)]
pub enum CertificateCommand {
    /// Solve the congruence system for b modulo W.
    Build(BuildArgs),
    /// Recheck every congruence of a certificate file.
    Verify { file: PathBuf },
    /// Walk W n + b + h_s and report indices with two or more primes.
    Scan(ScanArgs),
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Admissible set JSON as written by `primewin admissible`.
    #[arg(long)]
    from: PathBuf,

    /// thm13 (needs a lemma22 set) or lemma32 (needs a lemma31 set).
    /// Defaults to the one matching the set.
    #[arg(long)]
    variant: Option<String>,

    /// Window size the thm13 large-prime residues leave room for.
    #[arg(long, default_value_t = 1)]
    m: usize,

    /// Prescribed (v_i / v_j) for i < j.
    #[arg(long, default_value = "+1", allow_hyphen_values = true)]
    d1: String,

    /// Prescribed (v_j / v_i) for i < j.
    #[arg(long, default_value = "+1", allow_hyphen_values = true)]
    d2: String,

    /// Prime cutoff w, or `auto` for the smallest feasible one.
    #[arg(long, default_value = "auto")]
    w: String,

    /// Write the certificate here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    file: PathBuf,

    #[arg(long, default_value_t = 1)]
    min_n: u64,

    #[arg(long, default_value_t = 1_000_000)]
    max_n: u64,

    /// Stop after this many hits, counting those already in the checkpoint.
    #[arg(long)]
    hits: Option<usize>,

    /// Only check covering and residues, never primality.
    #[arg(long)]
    skip_primality: bool,

    #[command(flatten)]
    run: RunArgs,
}

fn parse_sign(s: &str) -> Result<i8> {
    match s {
        "+1" | "1" | "+" => Ok(1),
        "-1" | "-" => Ok(-1),
        _ => Err(Error::invalid(format!("sign must be +1 or -1, got {s:?}"))),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_certificate(path: &Path) -> Result<Certificate> {
    Certificate::from_json(&read(path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn build(args: BuildArgs) -> Result<Outcome> {
    let set = AdmissibleSet::from_json(&read(&args.from)?)
        .map_err(|e| Error::Format(format!("{}: {e}", args.from.display())))?;
    let variant = match &args.variant {
        Some(v) => v.parse()?,
        None => match set.variant {
            Variant::Lemma22 => CertVariant::Thm13,
            Variant::Lemma31 => CertVariant::Lemma32,
        },
    };
    let params = CertParams {
        m: args.m,
        delta1: parse_sign(&args.d1)?,
        delta2: parse_sign(&args.d2)?,
        w: args.w.parse::<Cutoff>()?,
    };
    let cert = build_certificate(&set, variant, &params)?;
    let report = verify_certificate(&cert)?;
    match &args.out {
        Some(path) => std::fs::write(path, cert.to_json())?,
        None => {
            Out::new().line(&cert.to_json())?;
        }
    }
    eprintln!(
        "{variant} certificate: w = {}, W has {} bits, {} gap offsets",
        cert.w,
        cert.modulus.bits(),
        cert.gap.len() + cert.gap_by_four.len()
    );
    eprint!("{report}");
    Ok(Outcome::from_report(report.all_passed()))
}

fn verify(path: &Path) -> Result<Outcome> {
    let cert = load_certificate(path)?;
    let mut report = Report::new();
    for check in verify_properties(&cert.set)?.checks {
        report.record(
            format!("set: {}", check.name),
            (!check.passed).then_some(check.detail),
        );
    }
    report.checks.extend(verify_certificate(&cert)?.checks);
    Out::new().line(report.to_string().trim_end())?;
    Ok(Outcome::from_report(report.all_passed()))
}

/// Resumable scan state, stored as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ScanCheckpoint {
    version: u32,
    /// Hex sha256 of the certificate file contents.
    certificate_sha256: String,
    last_n_scanned: u64,
    hits_found: u64,
    violations: u64,
}

impl ScanCheckpoint {
    fn load(path: &Path, digest: &str) -> Result<Self> {
        let ckpt: ScanCheckpoint = serde_json::from_str(&read(path)?)?;
        if ckpt.version != SCAN_CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "scan checkpoint version {} is not supported",
                ckpt.version
            )));
        }
        if ckpt.certificate_sha256 != digest {
            return Err(Error::invalid(format!(
                "checkpoint {} belongs to a different certificate",
                path.display()
            )));
        }
        Ok(ckpt)
    }

    fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn scan(globals: &Globals, args: ScanArgs) -> Result<Outcome> {
    let text = read(&args.file)?;
    let cert = Certificate::from_json(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", args.file.display())))?;
    let digest: String = Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    let mut ckpt = match &args.run.checkpoint {
        Some(p) if p.exists() => ScanCheckpoint::load(p, &digest)?,
        _ => ScanCheckpoint {
            version: SCAN_CHECKPOINT_VERSION,
            certificate_sha256: digest,
            last_n_scanned: 0,
            hits_found: 0,
            violations: 0,
        },
    };

    let cancel = interrupt_flag();
    let stop_at = deadline(args.run.time_limit);
    let mut reporter = Reporter::new(globals.quiet, args.min_n);
    let mut stats = ScanStats::default();
    let mut next = args.min_n.max(ckpt.last_n_scanned + 1);
    let mut interrupted = false;
    let mut out = Out::new();
    while next <= args.max_n {
        let remaining = match args.hits {
            Some(h) if ckpt.hits_found >= h as u64 => break,
            Some(h) => Some(h - ckpt.hits_found as usize),
            None => None,
        };
        let mut cfg = ScanConfig::new(next, args.max_n.min(next.saturating_add(SCAN_SLICE - 1)));
        cfg.max_hits = remaining;
        cfg.workers = args.run.workers();
        cfg.cancel = Some(cancel.clone());
        cfg.deadline = stop_at;
        if args.skip_primality {
            cfg.primality = PrimalityMode::Skip;
        }
        let base_hits = ckpt.hits_found as usize;
        let outcome = scan_progression_with(&cert, &cfg, |p| {
            reporter.report(p.scanned_through, base_hits + p.hits, "hits")
        })?;
        for hit in &outcome.hits {
            out.line(&hit.to_json_line())?;
        }
        for v in &outcome.violations {
            eprintln!("violation: {v}");
        }
        stats.absorb(&outcome.stats);
        stats.primality_tested |= outcome.stats.primality_tested;
        ckpt.hits_found += outcome.hits.len() as u64;
        ckpt.violations += outcome.stats.violations();
        ckpt.last_n_scanned = ckpt.last_n_scanned.max(outcome.scanned_through);
        if let Some(p) = &args.run.checkpoint {
            ckpt.save(p)?;
        }
        if outcome.interrupted {
            interrupted = true;
            break;
        }
        next = outcome.scanned_through + 1;
    }
    drop(out);

    eprintln!(
        "scanned through n = {}: {} hits, {} covering checks, {} residue checks, {} symbol checks, {} violations{}",
        ckpt.last_n_scanned,
        ckpt.hits_found,
        stats.covering_checks,
        stats.residue_checks,
        stats.symbol_checks,
        ckpt.violations,
        if stats.primality_tested || args.skip_primality { "" } else { " (W too large for primality tests)" }
    );
    if ckpt.violations > 0 {
        return Ok(Outcome::VerificationFailed);
    }
    if interrupted {
        eprintln!("interrupted at n = {}", ckpt.last_n_scanned);
        return Ok(Outcome::Interrupted);
    }
    Ok(Outcome::Success)
}

pub fn run(globals: &Globals, cmd: CertificateCommand) -> Result<Outcome> {
    match cmd {
        CertificateCommand::Build(args) => build(args),
        CertificateCommand::Verify { file } => verify(&file),
        CertificateCommand::Scan(args) => scan(globals, args),
    }
}
