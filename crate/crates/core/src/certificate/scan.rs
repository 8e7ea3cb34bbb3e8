use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CertVariant, Certificate};
use crate::arith::{jacobi_big, pow_mod_u64, rem_u64};
use crate::error::{Error, Result};
use crate::primes::{is_probable_prime_big, simple_sieve};
use crate::primroot::Certainty;
use crate::serde_dec;

/// Progression values are pre-sieved by the primes up to this bound.
const PRESIEVE_LIMIT: u64 = 1 << 22;
/// Indices handled per work unit; blocks start small so early hits come
/// back quickly, then double up to the maximum.
const FIRST_BLOCK: u64 = 1 << 10;
const MAX_BLOCK: u64 = 1 << 15;
/// Values wider than this are only checked for covering, not primality.
pub const PRIMALITY_MAX_BITS: u64 = 16_384;
const MAX_REPORTED_VIOLATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimalityMode {
    /// Test primality when `W` has at most [`PRIMALITY_MAX_BITS`] bits.
    Auto,
    /// Covering and residue checks only.
    Skip,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub n_start: u64,
    pub n_end: u64,
    /// Stop once this many hits have been found.
    pub max_hits: Option<usize>,
    pub workers: usize,
    pub primality: PrimalityMode,
    pub cancel: Option<Arc<AtomicBool>>,
    pub deadline: Option<Instant>,
}

impl ScanConfig {
    pub fn new(n_start: u64, n_end: u64) -> Self {
        ScanConfig {
            n_start,
            n_end,
            max_hits: None,
            workers: 1,
            primality: PrimalityMode::Auto,
            cancel: None,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub s: usize,
    #[serde(with = "serde_dec")]
    pub value: BigInt,
    pub prime: bool,
}

/// Predicted against observed symbols for two prime entries `i < j`.
///
/// For `thm13` the pair is `((v_i/v_j), (v_j/v_i))`. For `lemma32` it is
/// `((h_i - h_j)/v_j), ((h_j - h_i)/v_i))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSymbols {
    pub i: usize,
    pub j: usize,
    pub predicted: (i8, i8),
    pub observed: (i8, i8),
}

/// An index `n` where at least two of `Wn + b + h_s` are prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanHit {
    pub n: u64,
    pub entries: Vec<ScanEntry>,
    /// The set indices `s` whose values are prime; these are consecutive
    /// primes because every other offset in between is covered.
    pub window: Vec<usize>,
    pub symbols: Vec<PairSymbols>,
    pub certainty: Certainty,
}

impl ScanHit {
    pub fn matches_prediction(&self) -> bool {
        self.symbols.iter().all(|s| s.predicted == s.observed)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("hits always serialize")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanStats {
    pub indices_scanned: u64,
    pub covering_checks: u64,
    pub covering_violations: u64,
    pub residue_checks: u64,
    pub residue_violations: u64,
    pub primality_tests: u64,
    pub symbol_checks: u64,
    pub symbol_violations: u64,
    pub primality_tested: bool,
}

impl ScanStats {
    pub fn absorb(&mut self, o: &ScanStats) {
        self.indices_scanned += o.indices_scanned;
        self.covering_checks += o.covering_checks;
        self.covering_violations += o.covering_violations;
        self.residue_checks += o.residue_checks;
        self.residue_violations += o.residue_violations;
        self.primality_tests += o.primality_tests;
        self.symbol_checks += o.symbol_checks;
        self.symbol_violations += o.symbol_violations;
    }

    pub fn violations(&self) -> u64 {
        self.covering_violations + self.residue_violations + self.symbol_violations
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOutcome {
    pub hits: Vec<ScanHit>,
    /// Every index up to this one has been scanned.
    pub scanned_through: u64,
    pub stats: ScanStats,
    /// The first few violations, described.
    pub violations: Vec<String>,
    pub interrupted: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanProgress {
    pub scanned_through: u64,
    pub hits: usize,
}

struct Cover {
    a: u64,
    divisor: u64,
    w_mod: u64,
    b_mod: u64,
}

struct SievePrime {
    p: u64,
    // n ≡ root (mod p) makes W n + b + h_s divisible by p, one per s
    roots: Vec<u64>,
}

struct Context<'a> {
    cert: &'a Certificate,
    h: Vec<u64>,
    covers: Vec<Cover>,
    w8: u64,
    b8: u64,
    residue8: u64,
    sieve: Option<Vec<SievePrime>>,
    predicted: (i8, i8),
}

impl<'a> Context<'a> {
    fn new(cert: &'a Certificate, primality: PrimalityMode) -> Result<Self> {
        let h = cert.h_u64()?;
        let (w, b) = (&cert.modulus, &cert.b);
        let mut covers: Vec<Cover> = cert
            .gap
            .iter()
            .map(|g| Cover {
                a: g.a,
                divisor: g.q,
                w_mod: rem_u64(w, g.q),
                b_mod: rem_u64(b, g.q),
            })
            .collect();
        covers.extend(cert.gap_by_four.iter().map(|&a| Cover {
            a,
            divisor: 4,
            w_mod: rem_u64(w, 4),
            b_mod: rem_u64(b, 4),
        }));
        let residue8 = match cert.variant {
            CertVariant::Thm13 => match cert.delta() {
                Some(-1) => 7,
                _ => 1,
            },
            CertVariant::Lemma32 => 1,
        };
        let test = primality == PrimalityMode::Auto && w.bits() <= PRIMALITY_MAX_BITS;
        let sieve = test.then(|| {
            simple_sieve(PRESIEVE_LIMIT)
                .into_iter()
                .filter(|&p| p > cert.w)
                .map(|p| {
                    let wp = rem_u64(w, p);
                    let inv = pow_mod_u64(wp, p - 2, p);
                    let bp = rem_u64(b, p);
                    let roots = h
                        .iter()
                        .map(|&x| {
                            let neg = (p - (bp + x % p) % p) % p;
                            ((neg as u128 * inv as u128) % p as u128) as u64
                        })
                        .collect();
                    SievePrime { p, roots }
                })
                .collect()
        });
        let predicted = match cert.variant {
            CertVariant::Thm13 => (cert.delta1.unwrap_or(1), cert.delta2.unwrap_or(1)),
            CertVariant::Lemma32 => (-1, -1),
        };
        Ok(Context {
            cert,
            h,
            covers,
            w8: rem_u64(w, 8),
            b8: rem_u64(b, 8),
            residue8,
            sieve,
            predicted,
        })
    }

    fn value(&self, n: u64, s: usize) -> BigInt {
        &self.cert.modulus * n + &self.cert.b + self.h[s]
    }

    fn scan_block(&self, lo: u64, hi: u64) -> BlockResult {
        let mut out = BlockResult::default();
        let st = &mut out.stats;
        st.indices_scanned = hi - lo;
        for n in lo..hi {
            for &x in &self.h {
                st.residue_checks += 1;
                let r = ((self.w8 * (n % 8)) + self.b8 + x) % 8;
                if r != self.residue8 {
                    st.residue_violations += 1;
                    out.violations
                        .push(format!("n = {n}: W n + b + {x} is {r} mod 8"));
                }
            }
            for c in &self.covers {
                st.covering_checks += 1;
                let r = (mul_mod(c.w_mod, n % c.divisor, c.divisor) + c.b_mod + c.a % c.divisor)
                    % c.divisor;
                // n = 0 leaves b + a, which could in principle equal the divisor
                let trivial = n == 0 && self.cert.b.clone() + c.a <= BigInt::from(c.divisor);
                if r != 0 || trivial {
                    st.covering_violations += 1;
                    out.violations.push(format!(
                        "n = {n}: {} does not make W n + b + {} composite",
                        c.divisor, c.a
                    ));
                }
            }
        }
        if let Some(sieve) = &self.sieve {
            st.primality_tested = true;
            self.prime_hits(lo, hi, sieve, &mut out);
        }
        out
    }

    fn prime_hits(&self, lo: u64, hi: u64, sieve: &[SievePrime], out: &mut BlockResult) {
        let k = self.h.len();
        let len = (hi - lo) as usize;
        // bit s of alive[t] set while W (lo + t) + b + h_s may be prime
        let mut alive = vec![(1u16 << k) - 1; len];
        for sp in sieve {
            for (s, &root) in sp.roots.iter().enumerate() {
                let mut t = ((root + sp.p - lo % sp.p) % sp.p) as usize;
                while t < len {
                    alive[t] &= !(1 << s);
                    t += sp.p as usize;
                }
            }
        }
        for (t, &mask) in alive.iter().enumerate() {
            if mask.count_ones() < 2 {
                continue;
            }
            let n = lo + t as u64;
            let mut entries = Vec::with_capacity(k);
            let mut open = mask.count_ones();
            let mut primes = 0;
            for s in 0..k {
                let value = self.value(n, s);
                // untested entries count as composite once two primes are out of reach
                let prime = mask & (1 << s) != 0 && primes + open >= 2 && {
                    open -= 1;
                    out.stats.primality_tests += 1;
                    is_probable_prime_big(&value)
                };
                primes += prime as u32;
                entries.push(ScanEntry { s, value, prime });
            }
            if primes < 2 {
                continue;
            }
            let window: Vec<usize> = entries.iter().filter(|e| e.prime).map(|e| e.s).collect();
            let mut symbols = Vec::new();
            for (x, &i) in window.iter().enumerate() {
                for &j in &window[x + 1..] {
                    let (vi, vj) = (&entries[i].value, &entries[j].value);
                    let observed = match self.cert.variant {
                        CertVariant::Thm13 => (sym(vi, vj), sym(vj, vi)),
                        CertVariant::Lemma32 => {
                            let d = BigInt::from(self.h[i]) - self.h[j];
                            (sym(&d, vj), sym(&-d, vi))
                        }
                    };
                    out.stats.symbol_checks += 1;
                    if observed != self.predicted {
                        out.stats.symbol_violations += 1;
                        out.violations
                            .push(format!("n = {n}: pair ({i}, {j}) has symbols {observed:?}"));
                    }
                    symbols.push(PairSymbols {
                        i,
                        j,
                        predicted: self.predicted,
                        observed,
                    });
                }
            }
            let certainty = if entries.iter().all(|e| e.value.bits() <= 64) {
                Certainty::Proven
            } else {
                Certainty::Probable
            };
            out.hits.push(ScanHit {
                n,
                entries,
                window,
                symbols,
                certainty,
            });
        }
    }
}

fn sym(a: &BigInt, n: &BigInt) -> i8 {
    jacobi_big(a, n).unwrap_or(0)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[derive(Default)]
struct BlockResult {
    hits: Vec<ScanHit>,
    stats: ScanStats,
    violations: Vec<String>,
}

/// Scans `n` in `[n_start, n_end]`; see [`scan_progression_with`].
pub fn scan_progression(cert: &Certificate, cfg: &ScanConfig) -> Result<ScanOutcome> {
    scan_progression_with(cert, cfg, |_| {})
}

/// Walks the progression `W n + b + h_s` over `n` in `[n_start, n_end]`.
///
/// Every index gets the covering check (each gap offset's recorded divisor
/// divides `W n + b + a`) and the mod-8 residue check. When `W` is small
/// enough for primality tests, values are pre-sieved and every index with at
/// least two prime entries becomes a [`ScanHit`] with predicted and observed
/// symbols. Hits come back in ascending `n`.
pub fn scan_progression_with(
    cert: &Certificate,
    cfg: &ScanConfig,
    mut progress: impl FnMut(&ScanProgress),
) -> Result<ScanOutcome> {
    if cfg.n_end < cfg.n_start {
        return Err(Error::invalid(format!(
            "empty scan range [{}, {}]",
            cfg.n_start, cfg.n_end
        )));
    }
    if cfg.workers == 0 {
        return Err(Error::invalid("at least one worker is required"));
    }
    let ctx = Context::new(cert, cfg.primality)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::ResourceLimit(format!("cannot start worker pool: {e}")))?;

    let mut outcome = ScanOutcome {
        hits: Vec::new(),
        scanned_through: cfg.n_start.saturating_sub(1),
        stats: ScanStats {
            primality_tested: ctx.sieve.is_some(),
            ..ScanStats::default()
        },
        violations: Vec::new(),
        interrupted: false,
    };
    let mut next = cfg.n_start;
    let mut block = FIRST_BLOCK;
    'outer: while next <= cfg.n_end {
        let stop = cfg
            .cancel
            .as_ref()
            .is_some_and(|c| c.load(Ordering::Relaxed))
            || cfg.deadline.is_some_and(|d| Instant::now() >= d);
        if stop {
            outcome.interrupted = true;
            break;
        }
        let blocks: Vec<(u64, u64)> = (0..cfg.workers as u64)
            .map(|i| next.saturating_add(i * block))
            .take_while(|&lo| lo <= cfg.n_end)
            .map(|lo| {
                (
                    lo,
                    lo.saturating_add(block).min(cfg.n_end.saturating_add(1)),
                )
            })
            .collect();
        let results: Vec<BlockResult> = pool.install(|| {
            blocks
                .par_iter()
                .map(|&(lo, hi)| ctx.scan_block(lo, hi))
                .collect()
        });
        for (&(_, hi), r) in blocks.iter().zip(results) {
            outcome.stats.absorb(&r.stats);
            let room = MAX_REPORTED_VIOLATIONS.saturating_sub(outcome.violations.len());
            outcome
                .violations
                .extend(r.violations.into_iter().take(room));
            for hit in r.hits {
                let n = hit.n;
                outcome.hits.push(hit);
                if cfg.max_hits.is_some_and(|m| outcome.hits.len() >= m) {
                    outcome.scanned_through = n;
                    break 'outer;
                }
            }
            outcome.scanned_through = hi - 1;
            next = hi;
        }
        block = (block * 2).min(MAX_BLOCK);
        progress(&ScanProgress {
            scanned_through: outcome.scanned_through,
            hits: outcome.hits.len(),
        });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::{build_admissible, Variant};
    use crate::certificate::{build_certificate, CertParams};

    #[test]
    fn thm13_scan_finds_consistent_hits() {
        let set = build_admissible(2, Variant::Lemma22).unwrap();
        let cert = build_certificate(&set, CertVariant::Thm13, &CertParams::default()).unwrap();
        let mut cfg = ScanConfig::new(1, 10_000_000);
        cfg.max_hits = Some(2);
        let out = scan_progression(&cert, &cfg).unwrap();
        assert_eq!(out.hits.len(), 2);
        assert_eq!(out.stats.violations(), 0, "{:?}", out.violations);
        for hit in &out.hits {
            assert!(hit.matches_prediction());
            assert_eq!(hit.window, vec![0, 1]);
            assert_eq!(hit.certainty, Certainty::Probable);
        }
        assert_eq!(out.scanned_through, out.hits[1].n);
    }

    #[test]
    fn tampered_b_breaks_covering() {
        let set = build_admissible(2, Variant::Lemma22).unwrap();
        let mut cert = build_certificate(&set, CertVariant::Thm13, &CertParams::default()).unwrap();
        cert.b += 2;
        let mut cfg = ScanConfig::new(1, 100);
        cfg.primality = PrimalityMode::Skip;
        let out = scan_progression(&cert, &cfg).unwrap();
        assert!(out.stats.covering_violations > 0);
        assert!(!out.stats.primality_tested);
    }
}
