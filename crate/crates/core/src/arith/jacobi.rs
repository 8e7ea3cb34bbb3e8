use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Jacobi symbol `(a/n)` for odd `n` and `a < n`, binary algorithm.
///
/// Each step strips the factors of two from `a` (applying the second
/// supplement), swaps with reciprocity when `a < n`, and subtracts.
#[inline]
pub(crate) fn jacobi_odd_u64(mut a: u64, mut n: u64) -> i8 {
    debug_assert!(n & 1 == 1 && a < n);
    let mut t = 1i8;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z & 1 == 1 && matches!(n & 7, 3 | 5) {
            t = -t;
        }
        if a < n {
            std::mem::swap(&mut a, &mut n);
            if a & 3 == 3 && n & 3 == 3 {
                t = -t;
            }
        }
        a -= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Jacobi symbol `(a/n)` with an unsigned numerator. `n` must be odd.
///
/// This is the fast path used by the window scanners; it panics on even `n`
/// in debug builds only. Use [`jacobi`] for checked input.
#[inline]
pub fn jacobi_u64(a: u64, n: u64) -> i8 {
    debug_assert!(n & 1 == 1, "jacobi_u64: even modulus {n}");
    jacobi_odd_u64(a % n, n)
}

/// Jacobi symbol `(a/n)` for any integer `a` and odd positive `n`.
///
/// `(a/1) = 1` for every `a`. Returns 0 exactly when `gcd(a, n) > 1`.
pub fn jacobi(a: i128, n: u64) -> Result<i8> {
    if n == 0 || n & 1 == 0 {
        return Err(Error::invalid(format!(
            "Jacobi symbol needs an odd positive modulus, got {n}"
        )));
    }
    let r = a.rem_euclid(n as i128) as u64;
    Ok(jacobi_odd_u64(r, n))
}

/// Jacobi symbol over unbounded integers; same contract as [`jacobi`].
pub fn jacobi_big(a: &BigInt, n: &BigInt) -> Result<i8> {
    if n.sign() != Sign::Plus || n.is_even() {
        return Err(Error::invalid(format!(
            "Jacobi symbol needs an odd positive modulus, got {n}"
        )));
    }
    let n = n.magnitude();
    let a = a.mod_floor(&BigInt::from_biguint(Sign::Plus, n.clone()));
    Ok(jacobi_biguint(a.magnitude().clone(), n.clone()))
}

/// Binary reciprocity iteration on naturals; `n` odd. Uses a Euclidean
/// reduction in place of the subtraction so that operands of very different
/// sizes collapse in one step.
pub(crate) fn jacobi_biguint(mut a: BigUint, mut n: BigUint) -> i8 {
    if a >= n {
        a %= &n;
    }
    let mut t = 1i8;
    while !a.is_zero() {
        let z = a.trailing_zeros().unwrap_or(0);
        a >>= z;
        let n8 = low_u64(&n) & 7;
        if z & 1 == 1 && (n8 == 3 || n8 == 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        if low_u64(&a) & 3 == 3 && low_u64(&n) & 3 == 3 {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

fn low_u64(x: &BigUint) -> u64 {
    x.iter_u64_digits().next().unwrap_or(0)
}
