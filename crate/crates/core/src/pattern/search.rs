use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{pair_signs_unchecked, strict_witness, MatchRecord, Predicate, SignPattern};
use crate::error::{Error, Result};
use crate::primes::{PrimeIndexer, PrimeWindow, Sieve};
use crate::primroot::factorize_64;
use crate::primroot::primitive_root_with;

/// Width of the value interval one worker sieves and scans at a time.
pub const DEFAULT_CHUNK_SPAN: u64 = 1 << 24;

/// Chunks start this wide and double up to the configured span, so matches
/// near the start of a search come back without sieving a full batch.
const FIRST_CHUNK_SPAN: u64 = 1 << 16;

/// Parameters of a window search over prime indices.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub m: usize,
    pub predicate: Predicate,
    pub n_start: u64,
    /// Last starting index to consider; `None` runs to the sieve bound.
    pub n_end: Option<u64>,
    /// Stop after this many matches.
    pub limit: Option<usize>,
    pub workers: usize,
    pub chunk_span: u64,
}

impl SearchConfig {
    pub fn new(m: usize, predicate: Predicate) -> Self {
        SearchConfig {
            m,
            n_start: predicate.min_n(),
            predicate,
            n_end: None,
            limit: None,
            workers: 1,
            chunk_span: DEFAULT_CHUNK_SPAN,
        }
    }

    pub fn n_start(mut self, n: u64) -> Self {
        self.n_start = n;
        self
    }

    pub fn n_end(mut self, n: Option<u64>) -> Self {
        self.n_end = n;
        self
    }

    pub fn limit(mut self, limit: Option<usize>) -> Self {
        self.limit = limit;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn chunk_span(mut self, span: u64) -> Self {
        self.chunk_span = span;
        self
    }

    fn validate(&self, sieve: &Sieve) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("window size m must be at least 1"));
        }
        if let Some(fixed) = self.predicate.sign_pattern().and_then(SignPattern::fixed_m) {
            if fixed != self.m {
                return Err(Error::invalid(format!(
                    "matrix pattern is for m = {fixed} but m = {} was requested",
                    self.m
                )));
            }
        }
        if self.n_start < self.predicate.min_n() {
            return Err(Error::invalid(format!(
                "predicate {} needs n >= {}, got {}",
                self.predicate,
                self.predicate.min_n(),
                self.n_start
            )));
        }
        if let Some(end) = self.n_end {
            if end < self.n_start {
                return Err(Error::invalid(format!(
                    "empty index range [{}, {end}]",
                    self.n_start
                )));
            }
        }
        if self.workers == 0 {
            return Err(Error::invalid("at least one worker is required"));
        }
        if self.chunk_span < 1024 || self.chunk_span > sieve.budget() {
            return Err(Error::RangeTooLarge {
                requested: self.chunk_span,
                budget: sieve.budget(),
            });
        }
        Ok(())
    }
}

/// Snapshot handed to the progress hook after every batch of chunks.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    /// Every window with starting index at most this has been decided.
    pub scanned_through: u64,
    /// Values below this have been sieved.
    pub value_frontier: u64,
    pub matches: usize,
    pub elapsed: Duration,
}

/// Relation between an older and a newer prime that has to hold for every
/// pair in the window, regardless of position.
trait PairRule {
    type Aux;
    fn aux(&self, p: u64) -> Self::Aux;
    fn holds(&self, older: (u64, &Self::Aux), newer: (u64, &Self::Aux)) -> bool;
}

struct SignsRule {
    want: (i8, i8),
    strict_floor: Option<u64>,
}

impl PairRule for SignsRule {
    type Aux = ();

    fn aux(&self, _: u64) {}

    fn holds(&self, (q, _): (u64, &()), (p, _): (u64, &())) -> bool {
        pair_signs_unchecked(q, p) == self.want
            && self
                .strict_floor
                .is_none_or(|f| strict_witness(p - q, f).is_some())
    }
}

struct PrimRootRule;

impl PairRule for PrimRootRule {
    type Aux = Vec<u64>;

    fn aux(&self, p: u64) -> Vec<u64> {
        if p <= 2 {
            return Vec::new();
        }
        factorize_64(p - 1)
            .map(|f| f.primes().collect())
            .unwrap_or_default()
    }

    fn holds(&self, (q, qa): (u64, &Vec<u64>), (p, pa): (u64, &Vec<u64>)) -> bool {
        primitive_root_with(q % p, p, pa) && primitive_root_with(p % q, q, qa)
    }
}

trait Scanner {
    /// Feeds the next prime; true when the last `m + 1` primes form a match.
    fn push(&mut self, p: u64) -> bool;
}

/// For position-independent rules: tracks the length of the longest suffix
/// of primes that are pairwise related, so each new prime is tested only
/// against that suffix.
struct CliqueScanner<R: PairRule> {
    rule: R,
    ring: VecDeque<(u64, R::Aux)>,
    good: usize,
    m: usize,
}

impl<R: PairRule> CliqueScanner<R> {
    fn new(rule: R, m: usize) -> Self {
        CliqueScanner {
            rule,
            ring: VecDeque::with_capacity(m + 2),
            good: 0,
            m,
        }
    }
}

impl<R: PairRule> Scanner for CliqueScanner<R> {
    fn push(&mut self, p: u64) -> bool {
        let aux = self.rule.aux(p);
        let len = self.ring.len();
        let check = self.good.min(self.m).min(len);
        let mut good = check + 1;
        for k in 0..check {
            let (q, qa) = &self.ring[len - 1 - k];
            if !self.rule.holds((*q, qa), (p, &aux)) {
                good = k + 1;
                break;
            }
        }
        self.ring.push_back((p, aux));
        if self.ring.len() > self.m + 1 {
            self.ring.pop_front();
        }
        self.good = good;
        good == self.m + 1
    }
}

/// For matrix patterns: caches the symbols of each prime against its `m`
/// predecessors and compares the whole window position by position.
struct MatrixScanner {
    pattern: SignPattern,
    // (prime, symbols against predecessors, nearest first)
    ring: VecDeque<(u64, Vec<(i8, i8)>)>,
    m: usize,
}

impl Scanner for MatrixScanner {
    fn push(&mut self, p: u64) -> bool {
        let syms = self
            .ring
            .iter()
            .rev()
            .take(self.m)
            .map(|&(q, _)| pair_signs_unchecked(q, p))
            .collect();
        self.ring.push_back((p, syms));
        if self.ring.len() > self.m + 1 {
            self.ring.pop_front();
        }
        if self.ring.len() < self.m + 1 {
            return false;
        }
        (1..=self.m).all(|j| {
            let syms = &self.ring[j].1;
            (0..j).all(|i| syms[j - i - 1] == self.pattern.expected(i, j))
        })
    }
}

fn make_scanner(predicate: &Predicate, m: usize) -> Box<dyn Scanner> {
    match predicate {
        Predicate::PrimRoot => Box::new(CliqueScanner::new(PrimRootRule, m)),
        Predicate::Signs(SignPattern::Uniform { d1, d2 }) => Box::new(CliqueScanner::new(
            SignsRule {
                want: (*d1, *d2),
                strict_floor: None,
            },
            m,
        )),
        Predicate::SignsStrict(SignPattern::Uniform { d1, d2 }) => Box::new(CliqueScanner::new(
            SignsRule {
                want: (*d1, *d2),
                strict_floor: Some(2 * m as u64 + 1),
            },
            m,
        )),
        Predicate::Signs(pattern) | Predicate::SignsStrict(pattern) => Box::new(MatrixScanner {
            pattern: pattern.clone(),
            ring: VecDeque::with_capacity(m + 2),
            m,
        }),
    }
}

struct ChunkOutcome {
    /// Primes in the chunk.
    count: u64,
    /// (1-based position within the chunk of the window's newest prime, window)
    hits: Vec<(u64, Vec<u64>)>,
}

fn scan_chunk(sieve: &Sieve, lo: u64, hi: u64, m: usize, predicate: &Predicate) -> ChunkOutcome {
    let skip_two = !matches!(predicate, Predicate::PrimRoot);
    // the matrix scanner only checks symbols; strict matrices need the divisor check on top
    let strict_matrix = matches!(
        predicate,
        Predicate::SignsStrict(SignPattern::Matrix { .. })
    );
    let mut scanner = make_scanner(predicate, m);
    let mut ring: VecDeque<u64> = VecDeque::with_capacity(m + 2);
    let mut feed = |p: u64, scanner: &mut Box<dyn Scanner>| {
        ring.push_back(p);
        if ring.len() > m + 1 {
            ring.pop_front();
        }
        scanner
            .push(p)
            .then(|| ring.iter().copied().collect::<Vec<u64>>())
    };
    for p in sieve.primes_before(lo, m) {
        if !(skip_two && p == 2) {
            feed(p, &mut scanner);
        }
    }
    let seg = sieve.segment_unchecked(lo, hi);
    let mut count = 0;
    let mut hits = Vec::new();
    for p in seg.primes() {
        count += 1;
        if skip_two && p == 2 {
            continue;
        }
        if let Some(w) = feed(p, &mut scanner) {
            if strict_matrix && !all_pairs_strict(&w, 2 * m as u64 + 1) {
                continue;
            }
            hits.push((count, w));
        }
    }
    ChunkOutcome { count, hits }
}

fn all_pairs_strict(w: &[u64], floor: u64) -> bool {
    (0..w.len()).all(|i| {
        w[i + 1..]
            .iter()
            .all(|&b| strict_witness(b - w[i], floor).is_some())
    })
}

type ProgressHook = Box<dyn FnMut(&Progress) + Send>;

/// Lazily produces matching windows in increasing order of `n`.
///
/// Work proceeds in batches of `workers` value chunks sieved in parallel;
/// between batches the stream checks the cancel flag and the deadline and
/// reports progress.
pub struct MatchStream {
    cfg: SearchConfig,
    sieve: Arc<Sieve>,
    pool: rayon::ThreadPool,
    next_lo: u64,
    span: u64,
    // primes below `next_lo`
    count_before: u64,
    pending: VecDeque<MatchRecord>,
    emitted: usize,
    scanned_through: u64,
    finished: bool,
    interrupted: bool,
    error: Option<Error>,
    cancel: Option<Arc<AtomicBool>>,
    deadline: Option<Instant>,
    progress: Option<ProgressHook>,
    started: Instant,
}

impl MatchStream {
    pub fn new(cfg: SearchConfig, indexer: &mut PrimeIndexer) -> Result<Self> {
        let sieve = indexer.sieve().clone();
        cfg.validate(&sieve)?;
        let next_lo = indexer.nth_prime(cfg.n_start)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::ResourceLimit(format!("cannot start worker pool: {e}")))?;
        Ok(MatchStream {
            next_lo,
            span: cfg.chunk_span.min(FIRST_CHUNK_SPAN),
            count_before: cfg.n_start - 1,
            scanned_through: cfg.n_start - 1,
            finished: cfg.limit == Some(0),
            cfg,
            sieve,
            pool,
            pending: VecDeque::new(),
            emitted: 0,
            interrupted: false,
            error: None,
            cancel: None,
            deadline: None,
            progress: None,
            started: Instant::now(),
        })
    }

    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn with_progress(mut self, hook: impl FnMut(&Progress) + Send + 'static) -> Self {
        self.progress = Some(Box::new(hook));
        self
    }

    /// Every window with starting index at most this has been decided and,
    /// if it matched, already yielded or queued.
    pub fn scanned_through(&self) -> u64 {
        self.scanned_through
    }

    /// True when the stream stopped because of the cancel flag or deadline.
    pub fn interrupted(&self) -> bool {
        self.interrupted
    }

    pub fn matches_found(&self) -> usize {
        self.emitted
    }

    /// Matches decided but not yet yielded. When this is zero, everything up
    /// to [`MatchStream::scanned_through`] has been handed out.
    pub fn buffered(&self) -> usize {
        self.pending.len()
    }

    fn fill(&mut self) {
        let stop_requested = self
            .cancel
            .as_ref()
            .is_some_and(|c| c.load(Ordering::Relaxed))
            || self.deadline.is_some_and(|d| Instant::now() >= d);
        if stop_requested {
            self.interrupted = true;
            self.finished = true;
            return;
        }
        let limit_hi = self.sieve.limit() + 1;
        if self.next_lo >= limit_hi {
            self.finished = true;
            self.error = Some(Error::BoundExceeded(format!(
                "search reached the sieve bound {} after n = {}",
                self.sieve.limit(),
                self.scanned_through
            )));
            return;
        }
        let span = self.span;
        self.span = (span * 2).min(self.cfg.chunk_span);
        let chunks: Vec<(u64, u64)> = (0..self.cfg.workers as u64)
            .map(|i| self.next_lo.saturating_add(i * span))
            .take_while(|&a| a < limit_hi)
            .map(|a| (a, a.saturating_add(span).min(limit_hi)))
            .collect();
        let (sieve, m, predicate) = (&self.sieve, self.cfg.m, &self.cfg.predicate);
        let outcomes: Vec<ChunkOutcome> = self.pool.install(|| {
            chunks
                .par_iter()
                .map(|&(a, b)| scan_chunk(sieve, a, b, m, predicate))
                .collect()
        });
        let m = m as u64;
        'chunks: for (&(_, b), outcome) in chunks.iter().zip(outcomes) {
            for (local, primes) in outcome.hits {
                let n = self.count_before + local - m;
                if n < self.cfg.n_start {
                    continue;
                }
                if self.cfg.n_end.is_some_and(|e| n > e) {
                    break;
                }
                let window = PrimeWindow::from_sieved(n, primes);
                self.pending
                    .push_back(MatchRecord::from_window(&window, &self.cfg.predicate));
                self.emitted += 1;
                if self.cfg.limit.is_some_and(|l| self.emitted >= l) {
                    self.scanned_through = n;
                    self.finished = true;
                    break 'chunks;
                }
            }
            self.count_before += outcome.count;
            self.next_lo = b;
            let decided = self.count_before.saturating_sub(m);
            self.scanned_through = self.scanned_through.max(decided);
            if let Some(end) = self.cfg.n_end {
                if decided >= end {
                    self.scanned_through = end;
                    self.finished = true;
                    break;
                }
            }
        }
        if let Some(hook) = self.progress.as_mut() {
            hook(&Progress {
                scanned_through: self.scanned_through,
                value_frontier: self.next_lo,
                matches: self.emitted,
                elapsed: self.started.elapsed(),
            });
        }
    }
}

impl Iterator for MatchStream {
    type Item = Result<MatchRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(r) = self.pending.pop_front() {
                return Some(Ok(r));
            }
            if let Some(e) = self.error.take() {
                return Some(Err(e));
            }
            if self.finished {
                return None;
            }
            self.fill();
        }
    }
}

/// Runs a search to completion and collects the matches.
pub fn find_matches(cfg: SearchConfig, indexer: &mut PrimeIndexer) -> Result<Vec<MatchRecord>> {
    MatchStream::new(cfg, indexer)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(m: usize, predicate: &Predicate, n_end: u64) -> Vec<u64> {
        let mut idx = PrimeIndexer::new(1 << 22);
        idx.iter_windows(m, predicate.min_n(), n_end)
            .unwrap()
            .map(Result::unwrap)
            .filter(|w| predicate.evaluate(w).unwrap())
            .map(|w| w.n())
            .collect()
    }

    fn fast(m: usize, predicate: &Predicate, n_end: u64, span: u64, workers: usize) -> Vec<u64> {
        let mut idx = PrimeIndexer::new(1 << 22);
        let cfg = SearchConfig::new(m, predicate.clone())
            .n_end(Some(n_end))
            .chunk_span(span)
            .workers(workers);
        find_matches(cfg, &mut idx)
            .unwrap()
            .into_iter()
            .map(|r| r.n)
            .collect()
    }

    #[test]
    fn scanners_agree_with_window_evaluation() {
        let preds = [
            "++",
            "--",
            "+-",
            "-+",
            "strict:++",
            "primroot",
            "matrix(+;++,+)",
        ];
        for (m, s) in [
            (2, 0),
            (3, 1),
            (2, 2),
            (1, 3),
            (2, 4),
            (2, 5),
            (2, 6),
            (3, 0),
        ] {
            let pred: Predicate = preds[s].parse().unwrap();
            let want = brute(m, &pred, 40_000);
            assert!(!want.is_empty(), "{pred} m={m}");
            assert_eq!(fast(m, &pred, 40_000, 4096, 3), want, "{pred} m={m}");
        }
    }

    #[test]
    fn limit_and_scanned_through() {
        let mut idx = PrimeIndexer::new(1 << 24);
        let cfg = SearchConfig::new(2, "++".parse().unwrap()).limit(Some(3));
        let mut s = MatchStream::new(cfg, &mut idx).unwrap();
        let got: Vec<u64> = s.by_ref().map(|r| r.unwrap().n).collect();
        assert_eq!(got.len(), 3);
        assert_eq!(s.scanned_through(), got[2]);
    }

    #[test]
    fn bound_is_reported() {
        let mut idx = PrimeIndexer::new(10_000);
        let cfg = SearchConfig::new(9, "++".parse().unwrap()).chunk_span(4096);
        let res: Result<Vec<_>> = MatchStream::new(cfg, &mut idx).unwrap().collect();
        assert!(matches!(res, Err(Error::BoundExceeded(_))));
    }

    #[test]
    fn cancel_interrupts() {
        let mut idx = PrimeIndexer::new(1 << 30);
        let flag = Arc::new(AtomicBool::new(true));
        let cfg = SearchConfig::new(12, "++".parse().unwrap());
        let mut s = MatchStream::new(cfg, &mut idx).unwrap().with_cancel(flag);
        assert!(s.next().is_none());
        assert!(s.interrupted());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut idx = PrimeIndexer::new(1 << 20);
        let pred: Predicate = "++".parse().unwrap();
        assert!(MatchStream::new(SearchConfig::new(0, pred.clone()), &mut idx).is_err());
        assert!(MatchStream::new(SearchConfig::new(2, pred.clone()).n_start(1), &mut idx).is_err());
        let matrix: Predicate = "matrix(+;++,+)".parse().unwrap();
        assert!(MatchStream::new(SearchConfig::new(3, matrix), &mut idx).is_err());
    }
}
