//! Consecutive primes with prescribed Legendre-symbol and primitive-root
//! patterns.
//!
//! The crate has two halves. The search half ([`primes`], [`pattern`],
//! [`primroot`]) streams windows `p_n, …, p_{n+m}` of consecutive primes and
//! reports the indices `n` whose pairwise symbols `(p_{n+i}/p_{n+j})` follow a
//! sign pattern, or whose members are pairwise primitive roots of each other.
//!
//! The construction half ([`admissible`], [`certificate`]) builds admissible
//! sets whose pairwise differences carry private large-prime exact divisors,
//! then solves the congruence system for a residue `b` modulo `W` such that any
//! pair of primes `Wn + b + h_i`, `Wn + b + h_j` has its Legendre symbols fixed
//! in advance. Scans of the progression check those predictions numerically.

pub mod admissible;
pub mod arith;
pub mod certificate;
pub mod error;
pub mod pattern;
pub mod primes;
pub mod primroot;
pub mod report;
pub(crate) mod serde_dec;

pub use error::{Error, ErrorKind, Result};
pub use report::{Check, Report};
