use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::window::{PrimeWindow, WindowIter};
use super::{is_prime_64, PrimeStream, Sieve};
use crate::error::{Error, Result};

pub const DEFAULT_CHECKPOINT_STRIDE: u64 = 1_000_000;

/// Largest value the default indexer will sieve to.
pub const DEFAULT_BOUND: u64 = 1 << 40;

const CACHE_MAGIC: &str = "primewin-prime-index";
const CACHE_VERSION: u32 = 1;

/// Integers counted per parallel work item while extending the table.
const COUNT_BLOCK: u64 = 1 << 24;

/// One entry `(n, p_n)` of the checkpoint table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoint {
    pub n: u64,
    pub p: u64,
}

/// Maps prime indices to primes and back.
///
/// Keeps `(n, p_n)` for `n = 1, 1 + stride, 1 + 2·stride, …` so a lookup
/// only sieves forward from the nearest checkpoint. The table grows on
/// demand and can be persisted with [`PrimeIndexer::save`].
#[derive(Debug, Clone)]
pub struct PrimeIndexer {
    sieve: Arc<Sieve>,
    stride: u64,
    checkpoints: Vec<Checkpoint>,
    // every prime below `scanned_hi` has been counted; there are `scanned_count` of them
    scanned_hi: u64,
    scanned_count: u64,
}

impl Default for PrimeIndexer {
    fn default() -> Self {
        Self::new(DEFAULT_BOUND)
    }
}

impl PrimeIndexer {
    pub fn new(bound: u64) -> Self {
        Self::with_stride(bound, DEFAULT_CHECKPOINT_STRIDE)
    }

    pub fn with_stride(bound: u64, stride: u64) -> Self {
        PrimeIndexer {
            sieve: Arc::new(Sieve::new(bound)),
            stride: stride.max(1),
            checkpoints: vec![Checkpoint { n: 1, p: 2 }],
            scanned_hi: 3,
            scanned_count: 1,
        }
    }

    pub fn bound(&self) -> u64 {
        self.sieve.limit()
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    pub fn sieve(&self) -> &Arc<Sieve> {
        &self.sieve
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }

    fn extend_while(&mut self, mut needed: impl FnMut(&Self) -> bool) -> Result<()> {
        let batch = rayon::current_num_threads().max(1) * 2;
        while needed(self) {
            let limit_hi = self.sieve.limit() + 1;
            if self.scanned_hi >= limit_hi {
                return Err(Error::BoundExceeded(format!(
                    "prime index table reached the configured bound {}",
                    self.sieve.limit()
                )));
            }
            let blocks: Vec<(u64, u64)> = (0..batch as u64)
                .map(|i| self.scanned_hi.saturating_add(i * COUNT_BLOCK))
                .take_while(|&a| a < limit_hi)
                .map(|a| (a, a.saturating_add(COUNT_BLOCK).min(limit_hi)))
                .collect();
            let sieve = &self.sieve;
            let counts: Vec<u64> = blocks
                .par_iter()
                .map(|&(a, b)| sieve.count_range(a, b))
                .collect::<Result<_>>()?;
            for (&(a, b), &c) in blocks.iter().zip(&counts) {
                let mut target = self.next_checkpoint_index();
                if target <= self.scanned_count + c {
                    let primes = sieve.segment_unchecked(a, b).to_vec();
                    while target <= self.scanned_count + c {
                        let p = primes[(target - self.scanned_count - 1) as usize];
                        self.checkpoints.push(Checkpoint { n: target, p });
                        target = self.next_checkpoint_index();
                    }
                }
                self.scanned_count += c;
                self.scanned_hi = b;
                if !needed(self) {
                    break;
                }
            }
        }
        Ok(())
    }

    fn next_checkpoint_index(&self) -> u64 {
        1 + self.checkpoints.len() as u64 * self.stride
    }

    /// The `n`-th prime, 1-indexed.
    pub fn nth_prime(&mut self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::invalid("prime indices start at 1"));
        }
        let j = ((n - 1) / self.stride) as usize;
        self.extend_while(|s| s.checkpoints.len() <= j && s.scanned_count < n)?;
        let cp = self.checkpoints[j.min(self.checkpoints.len() - 1)];
        let skip = (n - cp.n) as usize;
        PrimeStream::new(self.sieve.clone(), cp.p)
            .nth(skip)
            .ok_or_else(|| {
                Error::BoundExceeded(format!(
                    "p_{n} exceeds the configured bound {}",
                    self.sieve.limit()
                ))
            })
    }

    /// The index `n` with `p_n = p`.
    pub fn index_of_prime(&mut self, p: u64) -> Result<u64> {
        if p > self.sieve.limit() {
            return Err(Error::BoundExceeded(format!(
                "{p} exceeds the configured bound {}",
                self.sieve.limit()
            )));
        }
        if !is_prime_64(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        self.extend_while(|s| s.scanned_hi <= p)?;
        let at = self.checkpoints.partition_point(|c| c.p <= p) - 1;
        let cp = self.checkpoints[at];
        Ok(cp.n + self.sieve.count_range(cp.p, p + 1)? - 1)
    }

    /// The window `p_n, …, p_{n+m}`.
    pub fn window_at(&mut self, n: u64, m: usize) -> Result<PrimeWindow> {
        self.iter_windows(m, n, n)?
            .next()
            .unwrap_or_else(|| Err(Error::invalid("empty window range")))
    }

    /// Windows of `m + 1` consecutive primes for `n` in `[n_start, n_end]`.
    pub fn iter_windows(&mut self, m: usize, n_start: u64, n_end: u64) -> Result<WindowIter> {
        if m == 0 {
            return Err(Error::invalid("window size m must be at least 1"));
        }
        let first = self.nth_prime(n_start)?;
        Ok(WindowIter {
            stream: PrimeStream::new(self.sieve.clone(), first),
            ring: VecDeque::with_capacity(m + 1),
            next_n: n_start,
            n_end,
            m,
            failed: false,
        })
    }

    /// Writes the checkpoint table in the versioned text format:
    ///
    /// ```text
    /// primewin-prime-index 1
    /// stride <stride>
    /// scanned <hi> <count>
    /// <n> <p_n>
    /// ...
    /// ```
    ///
    /// `scanned` records that exactly `count` primes lie below `hi`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{CACHE_MAGIC} {CACHE_VERSION}");
        let _ = writeln!(out, "stride {}", self.stride);
        let _ = writeln!(out, "scanned {} {}", self.scanned_hi, self.scanned_count);
        for c in &self.checkpoints {
            let _ = writeln!(out, "{} {}", c.n, c.p);
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, out)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Reads a table written by [`PrimeIndexer::save`].
    pub fn load(path: &Path, bound: u64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let bad = |what: &str| Error::Format(format!("{}: {what}", path.display()));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        if header != format!("{CACHE_MAGIC} {CACHE_VERSION}") {
            return Err(bad("unknown header or version"));
        }
        let stride: u64 = lines
            .next()
            .and_then(|l| l.strip_prefix("stride "))
            .and_then(|v| v.parse().ok())
            .filter(|&s| s > 0)
            .ok_or_else(|| bad("missing stride line"))?;
        let scanned: Vec<u64> = lines
            .next()
            .and_then(|l| l.strip_prefix("scanned "))
            .map(|v| {
                v.split_whitespace()
                    .filter_map(|x| x.parse().ok())
                    .collect()
            })
            .ok_or_else(|| bad("missing scanned line"))?;
        let [scanned_hi, scanned_count] = scanned[..] else {
            return Err(bad("scanned line needs two integers"));
        };
        let mut checkpoints = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace().map(str::parse::<u64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(n)), Some(Ok(p)), None) => checkpoints.push(Checkpoint { n, p }),
                _ => return Err(bad(&format!("bad checkpoint line {line:?}"))),
            }
        }
        if checkpoints.first() != Some(&Checkpoint { n: 1, p: 2 }) {
            return Err(bad("table must start with (1, 2)"));
        }
        for (j, c) in checkpoints.iter().enumerate() {
            if c.n != 1 + j as u64 * stride {
                return Err(bad(&format!(
                    "checkpoint {j} has index {} off the stride",
                    c.n
                )));
            }
        }
        if checkpoints.windows(2).any(|w| w[0].p >= w[1].p) {
            return Err(bad("checkpoint primes not increasing"));
        }
        let last = checkpoints[checkpoints.len() - 1];
        if !is_prime_64(last.p) || last.p >= scanned_hi || last.n > scanned_count {
            return Err(bad("checkpoints inconsistent with scanned range"));
        }
        if scanned_hi > bound.saturating_add(1) {
            return Err(bad("table extends past the requested bound"));
        }
        Ok(PrimeIndexer {
            sieve: Arc::new(Sieve::new(bound)),
            stride,
            checkpoints,
            scanned_hi,
            scanned_count,
        })
    }

    /// Loads `path` when it holds a usable table with this stride, otherwise
    /// starts empty.
    pub fn open_cached(path: &Path, bound: u64) -> Self {
        match Self::load(path, bound) {
            Ok(ix) if ix.stride == DEFAULT_CHECKPOINT_STRIDE => ix,
            _ => Self::new(bound),
        }
    }
}
