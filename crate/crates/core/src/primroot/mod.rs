//! Primitive roots modulo primes and the membership predicates used for
//! pairwise primitive-root windows.

mod factor;

pub use factor::{
    factorize_64, factorize_big_partial, Certainty, Factorization, PartialFactorization,
    BIG_RHO_MAX_BITS, PRIMALITY_TEST_MAX_BITS, TRIAL_DIVISION_BOUND,
};

use num_bigint::BigInt;
use num_traits::Signed;

use crate::arith::{pow_mod_u64, rem_u64};
use crate::error::{Error, Result};
use crate::primes::{is_prime_64, PrimeWindow};

/// A pair `(g, p)` for which primitive-root questions are asked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimRootQuery {
    g: i128,
    p: u64,
}

impl PrimRootQuery {
    pub fn new(g: i128, p: u64) -> Result<Self> {
        if !is_prime_64(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        Ok(PrimRootQuery { g, p })
    }

    pub fn g(&self) -> i128 {
        self.g
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_primitive_root(&self) -> bool {
        let pm1 = factorize_64_or_one(self.p);
        primitive_root_with(self.g.rem_euclid(self.p as i128) as u64, self.p, &pm1)
    }
}

fn factorize_64_or_one(p: u64) -> Vec<u64> {
    if p <= 2 {
        Vec::new()
    } else {
        factorize_64(p - 1)
            .map(|f| f.primes().collect())
            .unwrap_or_default()
    }
}

/// Primitive-root test with the prime divisors of `p - 1` supplied.
/// `g` must already be reduced modulo `p`.
#[inline]
pub(crate) fn primitive_root_with(g: u64, p: u64, pm1_primes: &[u64]) -> bool {
    g != 0
        && pm1_primes
            .iter()
            .all(|&q| pow_mod_u64(g, (p - 1) / q, p) != 1)
}

/// Whether `g` generates the multiplicative group modulo the prime `p`.
///
/// `g` is reduced modulo `p` first; `g ≡ 0` gives `false`. Modulo 2 the
/// group is trivial, so every odd `g` counts as a generator.
pub fn is_primitive_root(g: i128, p: u64) -> Result<bool> {
    Ok(PrimRootQuery::new(g, p)?.is_primitive_root())
}

/// Membership of `p` in `P_q(g) = { p : p ≡ 1 (mod q), g^((p-1)/q) ≡ 1 (mod p) }`.
pub fn in_pq(g: i128, q: u64, p: u64) -> Result<bool> {
    if !is_prime_64(q) {
        return Err(Error::invalid(format!("{q} is not prime")));
    }
    if !is_prime_64(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if p % q != 1 {
        return Ok(false);
    }
    let g = g.rem_euclid(p as i128) as u64;
    Ok(pow_mod_u64(g, (p - 1) / q, p) == 1)
}

/// Membership of `p` in `P_j`: every `|h_i - h_j|` with `i != j` is a
/// primitive root modulo `p`.
pub fn in_pj(h: &[BigInt], j: usize, p: u64) -> Result<bool> {
    if j >= h.len() {
        return Err(Error::invalid(format!(
            "index {j} outside a set of {} elements",
            h.len()
        )));
    }
    if !is_prime_64(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let pm1 = factorize_64_or_one(p);
    Ok(h.iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .all(|(_, hi)| {
            let d = (hi - &h[j]).abs();
            primitive_root_with(rem_u64(&d, p), p, &pm1)
        }))
}

/// Whether every member of the window is a primitive root modulo every other.
pub fn window_pairwise_primroot(window: &PrimeWindow) -> bool {
    let ps = window.primes();
    ps.iter().enumerate().all(|(j, &p)| {
        let pm1 = factorize_64_or_one(p);
        ps.iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .all(|(_, &g)| primitive_root_with(g % p, p, &pm1))
    })
}
