//! Exact integer primitives shared by every other module: Jacobi symbols,
//! modular powers, Chinese remaindering and p-adic valuations.
//!
//! Most operations come in two widths. The `u64` forms are the fast path for
//! window scans; the `BigInt` forms serve the constructions, whose integers
//! outgrow 64 bits after a few rounds.

mod crt;
mod jacobi;

pub use crt::{crt_solve, Congruence, CongruenceSystem};
pub use jacobi::{jacobi, jacobi_big, jacobi_u64};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::primes::is_prime_64;

#[inline]
pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m` over 64-bit operands; `m >= 1`.
pub fn pow_mod_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod_u64(result, b, m);
        }
        b = mul_mod_u64(b, b, m);
        exp >>= 1;
    }
    result
}

/// `base^exponent mod modulus` over unbounded integers.
///
/// The base may be negative; the result lies in `[0, modulus)`.
pub fn mod_pow(base: &BigInt, exponent: &BigInt, modulus: &BigInt) -> Result<BigInt> {
    if modulus <= &BigInt::one() {
        return Err(Error::invalid(format!(
            "mod_pow: modulus must exceed 1, got {modulus}"
        )));
    }
    if exponent.is_negative() {
        return Err(Error::invalid("mod_pow: negative exponent"));
    }
    let b = base.mod_floor(modulus);
    Ok(b.modpow(exponent, modulus))
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime_64(p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{p} is not prime")))
    }
}

/// Largest `e` with `p^e | a`.
pub fn p_adic_valuation(p: u64, a: &BigInt) -> Result<u32> {
    require_prime(p)?;
    if a.is_zero() {
        return Err(Error::invalid("p-adic valuation of zero is undefined"));
    }
    let p = BigInt::from(p);
    let mut e = 0;
    let mut x = a.abs();
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        x = q;
        e += 1;
    }
}

pub fn p_adic_valuation_u64(p: u64, a: u64) -> Result<u32> {
    require_prime(p)?;
    if a == 0 {
        return Err(Error::invalid("p-adic valuation of zero is undefined"));
    }
    Ok(valuation_unchecked(p, a))
}

#[inline]
pub(crate) fn valuation_unchecked(p: u64, mut a: u64) -> u32 {
    let mut e = 0;
    while a.is_multiple_of(p) {
        a /= p;
        e += 1;
    }
    e
}

/// `p ‖ a`: `p` divides `a` but `p²` does not.
pub fn exactly_divides(p: u64, a: &BigInt) -> Result<bool> {
    Ok(p_adic_valuation(p, a)? == 1)
}

/// `a` with every factor of two removed.
pub fn odd_part(a: &BigInt) -> Result<BigInt> {
    if !a.is_positive() {
        return Err(Error::invalid(format!(
            "odd part needs a positive integer, got {a}"
        )));
    }
    let z = a.trailing_zeros().unwrap_or(0);
    Ok(a >> z)
}

#[inline]
pub fn odd_part_u64(a: u64) -> u64 {
    debug_assert!(a > 0);
    a >> a.trailing_zeros()
}

/// Big integer residue modulo a machine word, in `[0, m)`.
#[inline]
pub(crate) fn rem_u64(x: &BigInt, m: u64) -> u64 {
    debug_assert!(m > 0);
    let r = x
        .iter_u64_digits()
        .rev()
        .fold(0u128, |acc, d| ((acc << 64) | d as u128) % m as u128) as u64;
    if x.is_negative() && r != 0 {
        m - r
    } else {
        r
    }
}
