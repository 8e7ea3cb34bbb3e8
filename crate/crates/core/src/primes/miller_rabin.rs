use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{mul_mod_u64, pow_mod_u64};

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Exact primality for every `n < 2^64`.
///
/// Strong probable-prime tests to the first twelve prime bases; that set has
/// no strong pseudoprime below 3.3·10^24.
pub fn is_prime_64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    SMALL_PRIMES
        .iter()
        .all(|&a| strong_probable_prime(n, d, s, a))
}

fn strong_probable_prime(n: u64, d: u64, s: u32, a: u64) -> bool {
    let mut x = pow_mod_u64(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Number of Miller–Rabin bases used above 64 bits.
pub const BIG_MR_ROUNDS: usize = 12;

/// Primality of an unbounded integer.
///
/// Exact below `2^64`. Above, a strong probable-prime test to the first
/// [`BIG_MR_ROUNDS`] prime bases (base 2 first, so most composites exit after
/// one exponentiation).
pub fn is_probable_prime_big(n: &BigInt) -> bool {
    match n.to_u64() {
        Some(v) => return is_prime_64(v),
        None if n.sign() == num_bigint::Sign::Minus => return false,
        None => {}
    }
    let n = n.magnitude();
    for &p in &SMALL_PRIMES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    SMALL_PRIMES[..BIG_MR_ROUNDS]
        .iter()
        .all(|&a| strong_probable_prime_big(n, &n_minus_1, &d, s, a))
}

fn strong_probable_prime_big(
    n: &BigUint,
    n_minus_1: &BigUint,
    d: &BigUint,
    s: u64,
    a: u64,
) -> bool {
    let mut x = BigUint::from(a).modpow(d, n);
    if x.is_one() || &x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x).mod_floor(n);
        if &x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert!(!is_prime_64(0));
        assert!(!is_prime_64(1));
        assert!(is_prime_64(2));
        assert!(is_prime_64(1185350899));
        assert!(!is_prime_64(1185350899 * 3));
        // strong pseudoprimes to several small bases
        assert!(!is_prime_64(3215031751));
        assert!(!is_prime_64(3825123056546413051));
        assert!(is_prime_64(18446744073709551557));
        assert!(!is_prime_64(u64::MAX));
    }

    #[test]
    fn big_agrees_below_2_64() {
        for n in [0u64, 1, 2, 91, 97, 561, 1185350899, 18446744073709551557] {
            assert_eq!(is_probable_prime_big(&BigInt::from(n)), is_prime_64(n));
        }
    }

    #[test]
    fn big_known_values() {
        // 2^89 - 1 and 2^127 - 1 are Mersenne primes; 2^67 - 1 is composite
        let m = |e: u32| (BigInt::one() << e) - 1;
        assert!(is_probable_prime_big(&m(89)));
        assert!(is_probable_prime_big(&m(127)));
        assert!(!is_probable_prime_big(&m(67)));
        assert!(!is_probable_prime_big(&(m(89) * m(61))));
    }
}
