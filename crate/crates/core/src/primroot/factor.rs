use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::mul_mod_u64;
use crate::error::{Error, Result};
use crate::primes::{is_prime_64, is_probable_prime_big, simple_sieve};

/// Trial division covers every prime below this bound before Pollard rho
/// takes over.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

fn trial_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| simple_sieve(TRIAL_DIVISION_BOUND))
}

/// Prime factorization `∏ p^e` of a 64-bit integer, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// The factored value, recomputed from the factors.
    pub fn value(&self) -> u128 {
        self.factors
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Euler's totient of the factored value.
    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }
}

/// Complete factorization of `n >= 2`: trial division by the primes below
/// [`TRIAL_DIVISION_BOUND`], then Brent's rho on a composite cofactor.
pub fn factorize_64(n: u64) -> Result<Factorization> {
    if n < 2 {
        return Err(Error::invalid(format!("cannot factor {n}")));
    }
    let mut found: Vec<u64> = Vec::new();
    let mut rest = n;
    for &p in trial_primes() {
        if p * p > rest {
            break;
        }
        while rest.is_multiple_of(p) {
            found.push(p);
            rest /= p;
        }
    }
    if rest > 1 {
        split_into(rest, &mut found);
    }
    found.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in found {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization { factors })
}

/// How sure a factor of [`PartialFactorization`] is to be prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certainty {
    /// Below `2^64`, decided by the deterministic test.
    Proven,
    /// Passed [`BIG_MR_ROUNDS`](crate::primes::BIG_MR_ROUNDS) strong
    /// probable-prime rounds.
    Probable,
}

/// Bounded-effort factorization of an unbounded integer.
///
/// `primes` holds every prime factor that was split off; whatever resisted
/// the effort bound stays in `cofactor`, which is coprime to all of them and
/// has no prime factor below the trial-division bound that was used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFactorization {
    pub primes: Vec<(BigInt, u32, Certainty)>,
    pub cofactor: BigInt,
}

impl PartialFactorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }
}

/// Cofactors up to this size get a probable-prime test.
pub const PRIMALITY_TEST_MAX_BITS: u64 = 4096;
/// Cofactors up to this size get a bounded Brent rho attempt.
pub const BIG_RHO_MAX_BITS: u64 = 192;
const BIG_RHO_ITERATIONS: u64 = 1 << 16;

/// Factors `|n|` (`n != 0`) as far as a fixed effort allows: trial division
/// by primes below `trial_bound` (capped at [`TRIAL_DIVISION_BOUND`]), exact
/// factoring of a 64-bit cofactor, then a probable-prime test and a bounded
/// rho pass on larger cofactors. Deterministic.
pub fn factorize_big_partial(n: &BigInt, trial_bound: u64) -> Result<PartialFactorization> {
    if n.is_zero() {
        return Err(Error::invalid("cannot factor 0"));
    }
    let mut rest = n.magnitude().clone();
    let mut found: Vec<(BigUint, Certainty)> = Vec::new();
    for &p in trial_primes().iter().take_while(|&&p| p < trial_bound) {
        if rest.bits() <= 64 {
            break;
        }
        while (&rest % p).is_zero() {
            rest /= p;
            found.push((BigUint::from(p), Certainty::Proven));
        }
    }
    let mut cofactor = BigUint::one();
    split_big(rest, &mut found, &mut cofactor);
    found.sort();
    let mut primes: Vec<(BigInt, u32, Certainty)> = Vec::new();
    for (p, c) in found {
        let p = BigInt::from(p);
        match primes.last_mut() {
            Some((q, e, _)) if *q == p => *e += 1,
            _ => primes.push((p, 1, c)),
        }
    }
    // a cofactor sharing a prime with the split-off part is divided down
    for (p, e, _) in primes.iter_mut() {
        let p = p.magnitude();
        while (&cofactor % p).is_zero() {
            cofactor /= p;
            *e += 1;
        }
    }
    Ok(PartialFactorization {
        primes,
        cofactor: BigInt::from(cofactor),
    })
}

fn split_big(n: BigUint, found: &mut Vec<(BigUint, Certainty)>, cofactor: &mut BigUint) {
    if n.is_one() {
        return;
    }
    if let Some(v) = n.to_u64() {
        let f = factorize_64(v).expect("n > 1");
        for &(p, e) in f.factors() {
            for _ in 0..e {
                found.push((BigUint::from(p), Certainty::Proven));
            }
        }
        return;
    }
    if n.bits() <= PRIMALITY_TEST_MAX_BITS && is_probable_prime_big(&BigInt::from(n.clone())) {
        found.push((n, Certainty::Probable));
        return;
    }
    if n.bits() <= BIG_RHO_MAX_BITS {
        if let Some(d) = rho_big(&n, BIG_RHO_ITERATIONS) {
            let other = &n / &d;
            split_big(d, found, cofactor);
            split_big(other, found, cofactor);
            return;
        }
    }
    *cofactor *= n;
}

/// Brent's rho on an unbounded odd composite, giving up after `budget`
/// polynomial steps per constant.
fn rho_big(n: &BigUint, budget: u64) -> Option<BigUint> {
    for c in 1u32..4 {
        let f = |x: &BigUint| (x * x + c) % n;
        let (mut y, mut q) = (BigUint::from(2u32), BigUint::one());
        let (mut r, mut steps) = (1u64, 0u64);
        let mut x;
        loop {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r {
                let batch = 64.min(r - k);
                let ys = y.clone();
                for _ in 0..batch {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = q * diff % n;
                }
                steps += batch;
                let g = q.gcd(n);
                if !g.is_one() {
                    if &g != n {
                        return Some(g);
                    }
                    // the batch overshot; replay it one step at a time
                    let mut ys = ys;
                    for _ in 0..batch {
                        ys = f(&ys);
                        let diff = if x > ys { &x - &ys } else { &ys - &x };
                        let g = diff.gcd(n);
                        if !g.is_one() && &g != n {
                            return Some(g);
                        }
                    }
                    break;
                }
                k += batch;
            }
            if steps >= budget || !q.gcd(n).is_one() {
                break;
            }
            r *= 2;
        }
    }
    None
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_64(n) {
        out.push(n);
        return;
    }
    let d = rho(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// A nontrivial divisor of the odd composite `n` (Brent's cycle variant).
fn rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    for c in 1u64.. {
        let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
        let (mut y, mut r, mut q, m) = (2u64, 1u64, 1u64, 128u64);
        let mut g = 1u64;
        let (mut x, mut ys) = (y, y);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod_u64(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_factorization_of_big_values() {
        let m89: BigInt = (BigInt::one() << 89u32) - 1;
        let n = &m89 * 1_000_003u64 * 999_983u64 * 8u32;
        let f = factorize_big_partial(&n, 100).unwrap();
        assert!(f.is_complete());
        let got: Vec<(BigInt, u32, Certainty)> = f.primes.clone();
        assert_eq!(
            got,
            vec![
                (BigInt::from(2), 3, Certainty::Proven),
                (BigInt::from(999_983), 1, Certainty::Proven),
                (BigInt::from(1_000_003), 1, Certainty::Proven),
                (m89.clone(), 1, Certainty::Probable),
            ]
        );

        // two 100-bit primes: far beyond the rho budget
        let p = (BigInt::one() << 100u32) + 277; // 2^100 + 277 is prime
        let q = (BigInt::one() << 100u32) + 331; // 2^100 + 331 is prime
        assert!(is_probable_prime_big(&p) && is_probable_prime_big(&q));
        let f = factorize_big_partial(&(&p * &q * 6), TRIAL_DIVISION_BOUND).unwrap();
        assert_eq!(f.cofactor, &p * &q);
        assert_eq!(f.primes.len(), 2);
        assert!(factorize_big_partial(&BigInt::zero(), 10).is_err());
    }

    #[test]
    fn small() {
        assert_eq!(factorize_64(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize_64(2).unwrap().factors(), &[(2, 1)]);
        assert!(factorize_64(1).is_err());
        assert_eq!(
            factorize_64(88258).unwrap().factors(),
            &[(2, 1), (44129, 1)]
        );
    }

    #[test]
    fn large_semiprimes_need_rho() {
        let (p, q) = (4_294_967_291u64, 4_294_967_279u64);
        let f = factorize_64(p * q).unwrap();
        assert_eq!(f.factors(), &[(q, 1), (p, 1)]);
        let (p, q) = (1_000_003u64, 999_999_999_989u64);
        assert_eq!(factorize_64(p * q).unwrap().factors(), &[(p, 1), (q, 1)]);
        let f = factorize_64(1_000_003u64.pow(3)).unwrap();
        assert_eq!(f.factors(), &[(1_000_003, 3)]);
    }

    #[test]
    fn phi() {
        assert_eq!(factorize_64(36).unwrap().euler_phi(), 12);
        assert_eq!(factorize_64(97).unwrap().euler_phi(), 96);
    }
}
