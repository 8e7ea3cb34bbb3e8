use std::sync::{Arc, OnceLock};

use num_integer::Roots;

use crate::error::{Error, Result};

/// Bits per cache block when marking composites.
pub const DEFAULT_SEGMENT_BITS: usize = 1 << 20;

/// Largest span (in integers) one [`Sieve::segment`] call will allocate.
pub const DEFAULT_RANGE_BUDGET: u64 = 1 << 31;

// The first odd primes are removed by copying a precomputed pattern instead
// of marking. The pattern has period 3·5·7·11·13 in odd-index units.
const PRESIEVE_PRIMES: [u64; 5] = [3, 5, 7, 11, 13];
const PRESIEVE_PERIOD: u64 = 15015;
const FIRST_MARKED_PRIME: u32 = 17;

fn presieve_pattern() -> &'static [u64] {
    static PATTERN: OnceLock<Vec<u64>> = OnceLock::new();
    PATTERN.get_or_init(|| {
        let words = PRESIEVE_PERIOD as usize;
        let mut pat = vec![0u64; words + 1];
        for g in 0..(words as u64 * 64) {
            let v = 2 * g + 1;
            if PRESIEVE_PRIMES.iter().all(|&p| v % p != 0) {
                pat[(g / 64) as usize] |= 1 << (g % 64);
            }
        }
        pat[words] = pat[0];
        pat
    })
}

#[inline]
fn pattern_word(pat: &[u64], g: u64) -> u64 {
    let off = g % (PRESIEVE_PERIOD * 64);
    let w = (off / 64) as usize;
    let sh = off % 64;
    if sh == 0 {
        pat[w]
    } else {
        (pat[w] >> sh) | (pat[w + 1] << (64 - sh))
    }
}

/// Primes up to `limit` by the plain sieve of Eratosthenes.
pub fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primality bitmap of the integers in `[lo, hi)`, odd values only.
#[derive(Debug, Clone)]
pub struct PrimeSegment {
    lo: u64,
    hi: u64,
    first_odd: u64,
    nbits: u64,
    words: Vec<u64>,
}

impl PrimeSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// Number of odd values tracked by the bitmap.
    pub fn odd_slots(&self) -> u64 {
        self.nbits
    }

    fn contains_two(&self) -> bool {
        self.lo <= 2 && 2 < self.hi
    }

    /// Number of primes in the segment.
    pub fn count(&self) -> u64 {
        let odd: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        odd + self.contains_two() as u64
    }

    /// `None` when `v` lies outside `[lo, hi)`.
    pub fn is_prime(&self, v: u64) -> Option<bool> {
        if v < self.lo || v >= self.hi {
            return None;
        }
        if v == 2 {
            return Some(true);
        }
        if v & 1 == 0 {
            return Some(false);
        }
        let i = (v - self.first_odd) / 2;
        Some(self.words[(i / 64) as usize] >> (i % 64) & 1 == 1)
    }

    /// The primes of the segment in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = self.contains_two().then_some(2u64);
        let base = self.first_odd;
        two.into_iter()
            .chain(self.words.iter().enumerate().flat_map(move |(k, &w)| {
                BitIter(w).map(move |t| base + 2 * (64 * k as u64 + t as u64))
            }))
    }

    /// Collects the primes into a vector.
    pub fn to_vec(&self) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.count() as usize);
        v.extend(self.primes());
        v
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let t = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(t)
    }
}

/// Segmented odd-only sieve able to produce any segment below `limit`.
#[derive(Debug, Clone)]
pub struct Sieve {
    limit: u64,
    base: Vec<u32>,
    segment_bits: u64,
    budget: u64,
}

impl Sieve {
    /// Sieve for values up to and including `limit`.
    pub fn new(limit: u64) -> Self {
        let limit = limit.min(u64::MAX - 1);
        let root = limit.sqrt();
        let base = simple_sieve(root)
            .into_iter()
            .filter(|&p| p >= FIRST_MARKED_PRIME as u64)
            .map(|p| p as u32)
            .collect();
        Sieve {
            limit,
            base,
            segment_bits: DEFAULT_SEGMENT_BITS as u64,
            budget: DEFAULT_RANGE_BUDGET,
        }
    }

    pub fn with_segment_bits(mut self, bits: usize) -> Self {
        self.segment_bits = (bits.max(64) as u64).div_ceil(64) * 64;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget.max(1);
        self
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Integers covered by one cache block.
    pub fn block_span(&self) -> u64 {
        self.segment_bits * 2
    }

    /// Sieves `[lo, hi)`.
    pub fn segment(&self, lo: u64, hi: u64) -> Result<PrimeSegment> {
        if hi <= lo {
            return Err(Error::invalid(format!("empty sieve range [{lo}, {hi})")));
        }
        if hi - 1 > self.limit {
            return Err(Error::BoundExceeded(format!(
                "sieve range [{lo}, {hi}) passes the configured limit {}",
                self.limit
            )));
        }
        if hi - lo > self.budget {
            return Err(Error::RangeTooLarge {
                requested: hi - lo,
                budget: self.budget,
            });
        }
        Ok(self.segment_unchecked(lo, hi))
    }

    pub(crate) fn segment_unchecked(&self, lo: u64, hi: u64) -> PrimeSegment {
        let first_odd = lo | 1;
        let nbits = if hi > first_odd {
            (hi - first_odd).div_ceil(2)
        } else {
            0
        };
        let nwords = nbits.div_ceil(64) as usize;
        let pat = presieve_pattern();
        let g0 = (first_odd - 1) / 2;
        let mut words: Vec<u64> = (0..nwords as u64)
            .map(|k| pattern_word(pat, g0 + 64 * k))
            .collect();
        if nbits % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (nbits % 64)) - 1;
            }
        }
        let mut seg = PrimeSegment {
            lo,
            hi,
            first_odd,
            nbits,
            words,
        };
        if nbits == 0 {
            return seg;
        }
        if first_odd == 1 {
            seg.words[0] &= !1;
        }
        for &p in &PRESIEVE_PRIMES {
            if p >= first_odd && p < hi {
                let i = (p - first_odd) / 2;
                seg.words[(i / 64) as usize] |= 1 << (i % 64);
            }
        }
        let root = (hi - 1).sqrt();
        let nprimes = self.base.partition_point(|&p| (p as u64) <= root);
        let primes = &self.base[..nprimes];
        let mut block_lo = 0u64;
        while block_lo < nbits {
            let block_hi = (block_lo + self.segment_bits).min(nbits);
            mark_block(&mut seg.words, first_odd, block_lo, block_hi, primes);
            block_lo = block_hi;
        }
        seg
    }

    /// Number of primes in `[lo, hi)`, for arbitrarily long ranges.
    pub fn count_range(&self, lo: u64, hi: u64) -> Result<u64> {
        let mut total = 0;
        let mut a = lo;
        while a < hi {
            let b = hi.min(a.saturating_add(self.budget));
            total += self.segment(a, b)?.count();
            a = b;
        }
        Ok(total)
    }

    /// Up to `count` largest primes strictly below `v`, ascending.
    pub fn primes_before(&self, v: u64, count: usize) -> Vec<u64> {
        let mut found: Vec<u64> = Vec::new();
        let mut hi = v.min(self.limit + 1);
        let mut span = 1024u64;
        while found.len() < count && hi > 0 {
            let lo = hi.saturating_sub(span);
            let seg = self.segment_unchecked(lo, hi);
            let mut chunk = seg.to_vec();
            chunk.extend_from_slice(&found);
            found = chunk;
            hi = lo;
            span = span.saturating_mul(2).min(self.block_span());
        }
        let skip = found.len().saturating_sub(count);
        found.split_off(skip)
    }
}

fn mark_block(words: &mut [u64], first_odd: u64, bit_lo: u64, bit_hi: u64, primes: &[u32]) {
    let v_lo = first_odd + 2 * bit_lo;
    let v_hi = first_odd + 2 * (bit_hi - 1);
    for &p in primes {
        let p = p as u64;
        let sq = p * p;
        if sq > v_hi {
            break;
        }
        let mut start = if sq >= v_lo { sq } else { v_lo.div_ceil(p) * p };
        if start & 1 == 0 {
            start += p;
        }
        let mut i = (start - first_odd) / 2;
        while i < bit_hi {
            words[(i >> 6) as usize] &= !(1u64 << (i & 63));
            i += p;
        }
    }
}

/// Builds one segment with a sieve sized for `hi`.
pub fn sieve_range(lo: u64, hi: u64) -> Result<PrimeSegment> {
    if hi <= lo {
        return Err(Error::invalid(format!("empty sieve range [{lo}, {hi})")));
    }
    Sieve::new(hi - 1).segment(lo, hi)
}

/// Ascending primes from a starting value, sieving one block at a time.
/// Ends at the sieve's limit.
pub struct PrimeStream {
    sieve: Arc<Sieve>,
    buf: std::vec::IntoIter<u64>,
    next_lo: u64,
}

impl PrimeStream {
    pub fn new(sieve: Arc<Sieve>, start: u64) -> Self {
        PrimeStream {
            sieve,
            buf: Vec::new().into_iter(),
            next_lo: start,
        }
    }

    /// Lowest value not yet sieved.
    pub fn frontier(&self) -> u64 {
        self.next_lo
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if let Some(p) = self.buf.next() {
                return Some(p);
            }
            let limit = self.sieve.limit();
            if self.next_lo > limit {
                return None;
            }
            let hi = self
                .next_lo
                .saturating_add(self.sieve.block_span())
                .min(limit + 1);
            let seg = self.sieve.segment_unchecked(self.next_lo, hi);
            self.buf = seg.to_vec().into_iter();
            self.next_lo = hi;
        }
    }
}
