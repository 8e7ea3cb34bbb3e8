use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{is_prime_64, PrimeStream};
use crate::error::{Error, Result};

/// The `m + 1` consecutive primes `p_n, …, p_{n+m}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeWindow {
    n: u64,
    primes: Vec<u64>,
}

impl PrimeWindow {
    /// Wraps a window without re-checking primality or consecutiveness.
    ///
    /// Intended for producers that read the primes straight off a sieve.
    pub fn from_sieved(n: u64, primes: Vec<u64>) -> Self {
        debug_assert!(primes.windows(2).all(|w| w[0] < w[1]));
        PrimeWindow { n, primes }
    }

    /// Checked constructor: entries must be strictly increasing primes with
    /// no prime strictly between neighbours. The index itself is not checked.
    pub fn new(n: u64, primes: Vec<u64>) -> Result<Self> {
        let w = PrimeWindow { n, primes };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("prime indices start at 1"));
        }
        if self.primes.len() < 2 {
            return Err(Error::invalid(
                "a window needs at least two primes (m >= 1)",
            ));
        }
        for &p in &self.primes {
            if !is_prime_64(p) {
                return Err(Error::invalid(format!("window entry {p} is not prime")));
            }
        }
        for pair in self.primes.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::invalid(format!(
                    "window entries not increasing: {} then {}",
                    pair[0], pair[1]
                )));
            }
            if let Some(q) = (pair[0] + 1..pair[1]).find(|&v| is_prime_64(v)) {
                return Err(Error::invalid(format!(
                    "{q} is prime and lies between window entries {} and {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }

    /// Index of the first prime.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.primes.len() - 1
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `p_{n+m} - p_n`.
    pub fn span(&self) -> u64 {
        self.primes[self.primes.len() - 1] - self.primes[0]
    }

    /// Successive differences `p_{n+i+1} - p_{n+i}`.
    pub fn gaps(&self) -> Vec<u64> {
        self.primes.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Windows `n = n_start ..= n_end` of consecutive primes, sliding by one.
pub struct WindowIter {
    pub(super) stream: PrimeStream,
    pub(super) ring: VecDeque<u64>,
    pub(super) next_n: u64,
    pub(super) n_end: u64,
    pub(super) m: usize,
    pub(super) failed: bool,
}

impl Iterator for WindowIter {
    type Item = Result<PrimeWindow>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next_n > self.n_end {
            return None;
        }
        if self.ring.len() == self.m + 1 {
            self.ring.pop_front();
        }
        while self.ring.len() < self.m + 1 {
            match self.stream.next() {
                Some(p) => self.ring.push_back(p),
                None => {
                    self.failed = true;
                    return Some(Err(Error::BoundExceeded(format!(
                        "window at n = {} passes the sieve limit",
                        self.next_n
                    ))));
                }
            }
        }
        let w = PrimeWindow::from_sieved(self.next_n, self.ring.iter().copied().collect());
        self.next_n += 1;
        Some(Ok(w))
    }
}
