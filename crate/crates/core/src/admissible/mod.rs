//! Admissible sets whose pairwise differences carry private large-prime
//! exact divisors.
//!
//! The builder adds one element per round. With `T` the threshold (`2k` or
//! `4k`) and `K = 4·∏_{p<T} p`, round `r` looks at every prime above `T` that
//! divides a difference of the current elements, steers the new element
//! `K·b` away from all of them modulo those primes, and plants a fresh prime
//! `q_s > T` exactly once in each new difference `K·b - h_s`. The planted
//! primes are the pair witnesses.
//!
//! Differences soon grow past what can be factored. The builder only needs
//! their `T`-rough parts (everything left after removing primes `<= T`),
//! which are pairwise coprime by construction, so a rough part that resists
//! factoring is used whole as a CRT modulus. Verification never factors:
//! the "no shared large prime" property is a pairwise gcd test.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{crt_solve, p_adic_valuation, rem_u64, CongruenceSystem};
use crate::error::{Error, Result};
use crate::primes::{is_prime_64, simple_sieve};
use crate::primroot::{factorize_big_partial, Certainty, TRIAL_DIVISION_BOUND};
use crate::report::Report;
use crate::serde_dec;

/// Largest `k` the builder accepts. The elements grow roughly like
/// `h_{r+1} ≈ h_r^{r(r-1)/2}`, so `k = 8` already means numbers with
/// hundreds of thousands of digits.
pub const MAX_K: usize = 8;

/// Rough parts above this many bits get a cheaper trial division pass.
const FULL_TRIAL_MAX_BITS: u64 = 1 << 14;
const REDUCED_TRIAL_BOUND: u64 = 10_000;

pub const SET_FORMAT_VERSION: u32 = 1;

/// Which threshold the construction uses: `2k` for sign patterns, `4k` for
/// the primitive-root application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Lemma22,
    Lemma31,
}

impl Variant {
    pub fn multiplier(self) -> u64 {
        match self {
            Variant::Lemma22 => 2,
            Variant::Lemma31 => 4,
        }
    }

    pub fn threshold(self, k: usize) -> u64 {
        self.multiplier() * k as u64
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Lemma22 => "lemma22",
            Variant::Lemma31 => "lemma31",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma22" => Ok(Variant::Lemma22),
            "lemma31" => Ok(Variant::Lemma31),
            _ => Err(Error::invalid(format!(
                "unknown variant {s:?}; use lemma22 or lemma31"
            ))),
        }
    }
}

/// `K = 4·∏_{p < threshold} p`.
pub fn base_modulus(threshold: u64) -> BigInt {
    simple_sieve(threshold.saturating_sub(1))
        .into_iter()
        .fold(BigInt::from(4), |acc, p| acc * p)
}

/// The prime `p` chosen for the pair `(i, j)`, `i < j`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWitness {
    pub i: usize,
    pub j: usize,
    pub p: u64,
}

/// One CRT modulus coming from a large-prime divisor of a difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulusKind {
    Prime,
    ProbablePrime,
    /// An unsplit product of primes above the trial-division bound.
    Composite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeModulus {
    #[serde(with = "serde_dec")]
    pub modulus: BigInt,
    pub kind: ModulusKind,
}

/// The recorded factorization of the rough part of `h_j - h_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoughPart {
    pub i: usize,
    pub j: usize,
    /// `(p, e)` with `p > threshold`, ascending.
    pub primes: Vec<LargeFactor>,
    /// Leftover composite, `1` when the factorization is complete.
    #[serde(with = "serde_dec")]
    pub cofactor: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeFactor {
    #[serde(with = "serde_dec")]
    pub p: BigInt,
    pub e: u32,
    pub certainty: Certainty,
}

impl RoughPart {
    fn moduli(&self) -> impl Iterator<Item = LargeModulus> + '_ {
        let primes = self.primes.iter().map(|f| LargeModulus {
            modulus: f.p.clone(),
            kind: match f.certainty {
                Certainty::Proven => ModulusKind::Prime,
                Certainty::Probable => ModulusKind::ProbablePrime,
            },
        });
        let rest = (!self.cofactor.is_one()).then(|| LargeModulus {
            modulus: self.cofactor.clone(),
            kind: ModulusKind::Composite,
        });
        primes.chain(rest)
    }

    fn value(&self) -> BigInt {
        self.primes
            .iter()
            .fold(self.cofactor.clone(), |acc, f| acc * f.p.pow(f.e))
    }
}

/// Everything chosen in one round of the builder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// Number of elements before the round; the round produces `h_{r+1}`.
    pub r: usize,
    /// `X_r`: moduli above the threshold dividing earlier differences.
    pub x: Vec<LargeModulus>,
    /// `b_i` with `K·b_i ≡ h_i` modulo the product of `x`.
    #[serde(with = "serde_dec::vec")]
    pub b_residues: Vec<BigInt>,
    /// `a_p` for each entry of `x`, in the same order.
    #[serde(with = "serde_dec::vec")]
    pub a: Vec<BigInt>,
    /// Fresh primes `q_1 < … < q_r`, none in `x`.
    pub q: Vec<u64>,
    /// `c_i` with `K·c_i ≡ h_i (mod q_i²)`.
    #[serde(with = "serde_dec::vec")]
    pub c: Vec<BigInt>,
    #[serde(with = "serde_dec")]
    pub b: BigInt,
}

/// An admissible set `0 = h_1 < … < h_k`, all multiples of `K`, with one
/// planted witness prime per pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleSet {
    pub version: u32,
    pub k: usize,
    pub variant: Variant,
    #[serde(rename = "K", with = "serde_dec")]
    pub modulus: BigInt,
    #[serde(with = "serde_dec::vec")]
    pub h: Vec<BigInt>,
    pub witnesses: Vec<PairWitness>,
    #[serde(default)]
    pub rough_parts: Vec<RoughPart>,
    #[serde(default)]
    pub trace: Vec<RoundTrace>,
}

impl AdmissibleSet {
    pub fn threshold(&self) -> u64 {
        self.variant.threshold(self.k)
    }

    pub fn witness(&self, i: usize, j: usize) -> Option<u64> {
        let (i, j) = (i.min(j), i.max(j));
        self.witnesses
            .iter()
            .find(|w| w.i == i && w.j == j)
            .map(|w| w.p)
    }

    /// `h_k`, the diameter of the set.
    pub fn diameter(&self) -> &BigInt {
        self.h.last().expect("sets are nonempty")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sets always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: AdmissibleSet = serde_json::from_str(text)?;
        if set.version != SET_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "admissible set format version {} is not supported",
                set.version
            )));
        }
        Ok(set)
    }
}

/// Removes every prime factor `<= threshold`.
fn rough_part(d: &BigInt, threshold: u64) -> BigInt {
    let mut x = d.abs();
    for p in simple_sieve(threshold) {
        let p = BigInt::from(p);
        loop {
            let (q, r) = x.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            x = q;
        }
    }
    x
}

fn factor_rough(i: usize, j: usize, rough: BigInt) -> Result<RoughPart> {
    if rough.is_one() {
        return Ok(RoughPart {
            i,
            j,
            primes: Vec::new(),
            cofactor: rough,
        });
    }
    let bound = if rough.bits() <= FULL_TRIAL_MAX_BITS {
        TRIAL_DIVISION_BOUND
    } else {
        REDUCED_TRIAL_BOUND
    };
    let f = factorize_big_partial(&rough, bound)?;
    Ok(RoughPart {
        i,
        j,
        primes: f
            .primes
            .into_iter()
            .map(|(p, e, certainty)| LargeFactor { p, e, certainty })
            .collect(),
        cofactor: f.cofactor,
    })
}

/// Smallest `a >= 0` with `gcd(a - b_i, M) = 1` for every `i`. For a prime
/// `M` this is the smallest residue distinct from every `b_i`.
fn avoiding_residue(modulus: &BigInt, b: &[BigInt]) -> BigInt {
    let mut a = BigInt::zero();
    loop {
        if b.iter().all(|bi| (&a - bi).gcd(modulus).is_one()) {
            return a;
        }
        a += 1;
    }
}

fn inverse_mod(a: &BigInt, m: &BigInt) -> BigInt {
    if m.is_one() {
        return BigInt::zero();
    }
    a.modinv(m)
        .expect("K is coprime to every modulus above the threshold")
}

/// Builds the set deterministically:
///
/// * `a_p` is the smallest nonnegative residue avoiding every `b_i` (for an
///   unsplit composite modulus, the smallest one coprime to every `a - b_i`);
/// * `q_1, …, q_r` are the `r` smallest primes above the threshold that divide
///   no earlier difference, assigned in index order;
/// * `b` is the smallest integer above `h_r / K` solving the round's system.
pub fn build_admissible(k: usize, variant: Variant) -> Result<AdmissibleSet> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "admissible sets need k > 1, got {k}"
        )));
    }
    if k > MAX_K {
        return Err(Error::invalid(format!(
            "k = {k} is above the builder cap of {MAX_K}"
        )));
    }
    let threshold = variant.threshold(k);
    let kk = base_modulus(threshold);
    let mut h = vec![BigInt::zero()];
    let mut rough: Vec<RoughPart> = Vec::new();
    let mut witnesses = Vec::new();
    let mut trace = Vec::new();

    for r in 1..k {
        let x: Vec<LargeModulus> = rough.iter().flat_map(RoughPart::moduli).collect();
        let x_product: BigInt = x.iter().map(|m| &m.modulus).product();
        let k_inv = inverse_mod(&kk, &x_product);
        let b_residues: Vec<BigInt> = h
            .iter()
            .map(|hi| (hi * &k_inv).mod_floor(&x_product))
            .collect();

        let mut system = CongruenceSystem::new();
        let mut a = Vec::with_capacity(x.len());
        for m in &x {
            let reduced: Vec<BigInt> = b_residues
                .iter()
                .map(|bi| bi.mod_floor(&m.modulus))
                .collect();
            let ap = avoiding_residue(&m.modulus, &reduced);
            system.add(ap.clone(), m.modulus.clone())?;
            a.push(ap);
        }

        let q = fresh_primes(&h, threshold, r);
        let mut c = Vec::with_capacity(r);
        for (hi, &qi) in h.iter().zip(&q) {
            let q2 = BigInt::from(qi) * qi;
            let ci = (hi * inverse_mod(&kk, &q2)).mod_floor(&q2);
            system.add(&ci + qi, q2)?;
            c.push(ci);
        }

        let sol = crt_solve(&system)?;
        let lower: BigInt = h[r - 1].div_floor(&kk) + 1;
        let b = &lower + (sol.residue() - &lower).mod_floor(sol.modulus());
        let h_new = &kk * &b;

        for (s, &qs) in q.iter().enumerate() {
            witnesses.push(PairWitness { i: s, j: r, p: qs });
            rough.push(factor_rough(
                s,
                r,
                rough_part(&(&h_new - &h[s]), threshold),
            )?);
        }
        trace.push(RoundTrace {
            r,
            x,
            b_residues,
            a,
            q,
            c,
            b,
        });
        h.push(h_new);
    }

    witnesses.sort_by_key(|w| (w.i, w.j));
    rough.sort_by_key(|p| (p.i, p.j));
    Ok(AdmissibleSet {
        version: SET_FORMAT_VERSION,
        k,
        variant,
        modulus: kk,
        h,
        witnesses,
        rough_parts: rough,
        trace,
    })
}

/// The `count` smallest primes above `threshold` dividing none of the
/// differences `h_t - h_s`.
fn fresh_primes(h: &[BigInt], threshold: u64, count: usize) -> Vec<u64> {
    let diffs: Vec<BigInt> = (0..h.len())
        .flat_map(|t| (0..t).map(move |s| (t, s)))
        .map(|(t, s)| &h[t] - &h[s])
        .collect();
    (threshold + 1..)
        .filter(|&q| is_prime_64(q))
        .filter(|&q| diffs.iter().all(|d| rem_u64(d, q) != 0))
        .take(count)
        .collect()
}

/// Whether the residues of `h` modulo every prime `p <= h.len()` miss at
/// least one class. Larger primes cannot be covered by `h.len()` residues.
pub fn is_admissible(h: &[BigInt]) -> Result<bool> {
    let mut sorted: Vec<&BigInt> = h.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::invalid(format!("duplicate entry {}", w[0])));
    }
    Ok(first_covered_prime(h).is_none())
}

fn first_covered_prime(h: &[BigInt]) -> Option<u64> {
    simple_sieve(h.len() as u64).into_iter().find(|&p| {
        let mut seen = vec![false; p as usize];
        for x in h {
            seen[rem_u64(x, p) as usize] = true;
        }
        seen.iter().all(|&s| s)
    })
}

/// Re-checks every claimed property of `set` without trusting the builder.
///
/// Property (iii) is decided exactly by pairwise gcds of the `T`-rough parts
/// of the differences, so no factoring is involved. The recorded rough-part
/// factorizations and the builder trace are checked for consistency when
/// present.
pub fn verify_properties(set: &AdmissibleSet) -> Result<Report> {
    let k = set.k;
    if k < 2 {
        return Err(Error::invalid(format!(
            "admissible sets need k > 1, got {k}"
        )));
    }
    let threshold = set.threshold();
    let h = &set.h;
    let mut report = Report::new();

    let shape = if h.len() != k {
        Some(format!("expected {k} elements, found {}", h.len()))
    } else if !h[0].is_zero() {
        Some(format!("h_1 = {} instead of 0", h[0]))
    } else {
        h.windows(2).position(|w| w[0] >= w[1]).map(|i| {
            format!(
                "h_{} = {} is not below h_{} = {}",
                i + 1,
                h[i],
                i + 2,
                h[i + 1]
            )
        })
    };
    let shape_ok = shape.is_none();
    report.record("h strictly increasing from 0", shape);
    if !shape_ok {
        return Ok(report);
    }

    let expected_k = base_modulus(threshold);
    report.record(
        "K = 4 * product of primes below the threshold",
        (set.modulus != expected_k)
            .then(|| format!("K = {} but expected {expected_k}", set.modulus)),
    );

    report.record(
        "(i) K divides every h_i",
        h.iter()
            .position(|x| !x.is_multiple_of(&expected_k))
            .map(|i| format!("K = {expected_k} does not divide h_{} = {}", i + 1, h[i])),
    );

    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    report.record(
        "(ii) exact large-prime divisor for every pair",
        check_witnesses(set, &pairs, threshold),
    );

    let mut ws: Vec<u64> = set.witnesses.iter().map(|w| w.p).collect();
    ws.sort_unstable();
    ws.dedup();
    report.record(
        "witnesses pairwise distinct",
        (ws.len() != pairs.len() || set.witnesses.len() != pairs.len())
            .then(|| format!("{} distinct witnesses for {} pairs", ws.len(), pairs.len())),
    );

    let roughs: Vec<BigInt> = pairs
        .iter()
        .map(|&(i, j)| rough_part(&(&h[j] - &h[i]), threshold))
        .collect();
    report.record(
        "(iii) no large prime divides two differences",
        shared_large_prime(&pairs, &roughs),
    );

    let admissible = match first_covered_prime(h) {
        Some(p) => Some(format!("residues modulo {p} cover every class")),
        None => simple_sieve(threshold.saturating_sub(1))
            .into_iter()
            .find_map(|p| {
                h.iter()
                    .position(|x| rem_u64(x, p) != 0)
                    .map(|i| format!("h_{} = {} is not 0 mod {p}", i + 1, h[i]))
            }),
    };
    report.record(
        "admissible (h_i = 0 mod p for p below the threshold)",
        admissible,
    );

    if !set.rough_parts.is_empty() {
        report.record(
            "recorded rough-part factorizations",
            check_rough_parts(set, &pairs, &roughs),
        );
    }
    if !set.trace.is_empty() {
        report.record("builder trace congruences", check_trace(set));
    }
    Ok(report)
}

fn check_witnesses(
    set: &AdmissibleSet,
    pairs: &[(usize, usize)],
    threshold: u64,
) -> Option<String> {
    for &(i, j) in pairs {
        let Some(p) = set.witness(i, j) else {
            return Some(format!(
                "no witness recorded for pair ({}, {})",
                i + 1,
                j + 1
            ));
        };
        if p <= threshold || !is_prime_64(p) {
            return Some(format!(
                "witness {p} of pair ({}, {}) is not a prime above {threshold}",
                i + 1,
                j + 1
            ));
        }
        let d = &set.h[j] - &set.h[i];
        match p_adic_valuation(p, &d) {
            Ok(1) => {}
            Ok(e) => {
                return Some(format!(
                    "witness {p} of pair ({}, {}) has valuation {e} in h_{} - h_{}",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1
                ))
            }
            Err(e) => return Some(e.to_string()),
        }
    }
    None
}

fn shared_large_prime(pairs: &[(usize, usize)], roughs: &[BigInt]) -> Option<String> {
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            let g = roughs[a].gcd(&roughs[b]);
            if !g.is_one() {
                let shown = simple_sieve(1 << 16)
                    .into_iter()
                    .find(|&p| rem_u64(&g, p) == 0)
                    .map_or_else(|| format!("the factor {g}"), |p| format!("the prime {p}"));
                let ((i, j), (s, t)) = (pairs[a], pairs[b]);
                return Some(format!(
                    "h_{} - h_{} and h_{} - h_{} share {shown}",
                    j + 1,
                    i + 1,
                    t + 1,
                    s + 1
                ));
            }
        }
    }
    None
}

fn check_rough_parts(
    set: &AdmissibleSet,
    pairs: &[(usize, usize)],
    roughs: &[BigInt],
) -> Option<String> {
    for (&(i, j), rough) in pairs.iter().zip(roughs) {
        let Some(rec) = set.rough_parts.iter().find(|r| r.i == i && r.j == j) else {
            return Some(format!(
                "no rough part recorded for pair ({}, {})",
                i + 1,
                j + 1
            ));
        };
        if &rec.value() != rough {
            return Some(format!(
                "recorded factors of h_{} - h_{} do not multiply back",
                j + 1,
                i + 1
            ));
        }
    }
    None
}

fn check_trace(set: &AdmissibleSet) -> Option<String> {
    let kk = &set.modulus;
    for round in &set.trace {
        let r = round.r;
        if r == 0 || r >= set.h.len() {
            return Some(format!("round {r} is out of range"));
        }
        let x_product: BigInt = round.x.iter().map(|m| &m.modulus).product();
        for (i, bi) in round.b_residues.iter().enumerate() {
            if !(kk * bi - &set.h[i]).is_multiple_of(&x_product) {
                return Some(format!(
                    "round {r}: K*b_{} is not h_{} modulo prod X_r",
                    i + 1,
                    i + 1
                ));
            }
        }
        for (m, a) in round.x.iter().zip(&round.a) {
            if (&round.b - a).mod_floor(&m.modulus) != BigInt::zero() {
                return Some(format!("round {r}: b is not a_p modulo {}", m.modulus));
            }
        }
        for (i, (&q, c)) in round.q.iter().zip(&round.c).enumerate() {
            let q2 = BigInt::from(q) * q;
            if round.x.iter().any(|m| rem_u64(&m.modulus, q) == 0) || q <= set.threshold() {
                return Some(format!("round {r}: q_{} = {q} is not a fresh prime", i + 1));
            }
            if !(kk * c - &set.h[i]).is_multiple_of(&q2) {
                return Some(format!(
                    "round {r}: K*c_{} is not h_{} modulo {q}^2",
                    i + 1,
                    i + 1
                ));
            }
            if !(&round.b - c - q).is_multiple_of(&q2) {
                return Some(format!(
                    "round {r}: b is not c_{} + q_{} modulo {q}^2",
                    i + 1,
                    i + 1
                ));
            }
        }
        if kk * &round.b != set.h[r] {
            return Some(format!("round {r}: h_{} differs from K*b", r + 1));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn admissibility_examples() {
        assert!(!is_admissible(&ints(&[0, 1])).unwrap());
        assert!(is_admissible(&ints(&[0, 2])).unwrap());
        assert!(!is_admissible(&ints(&[0, 2, 4])).unwrap());
        assert!(is_admissible(&ints(&[0, 120])).unwrap());
        assert!(is_admissible(&ints(&[0, 2, 6])).unwrap());
        assert!(is_admissible(&ints(&[0, 0])).is_err());
    }

    #[test]
    fn base_moduli() {
        assert_eq!(base_modulus(4), BigInt::from(24));
        assert_eq!(base_modulus(8), BigInt::from(840));
        assert_eq!(base_modulus(12), BigInt::from(9240));
    }

    #[test]
    fn golden_k2() {
        let s = build_admissible(2, Variant::Lemma22).unwrap();
        assert_eq!(s.h, ints(&[0, 120]));
        assert_eq!(s.modulus, BigInt::from(24));
        assert_eq!(s.witness(0, 1), Some(5));
        assert_eq!(s.trace[0].q, vec![5]);
        assert_eq!(s.trace[0].b, BigInt::from(5));

        let s = build_admissible(2, Variant::Lemma31).unwrap();
        assert_eq!(s.h, ints(&[0, 9240]));
        assert_eq!(s.modulus, BigInt::from(840));
        assert_eq!(s.witness(0, 1), Some(11));
    }

    #[test]
    fn builds_verify_and_round_trip() {
        for variant in [Variant::Lemma22, Variant::Lemma31] {
            for k in 2..=5 {
                let s = build_admissible(k, variant).unwrap();
                let report = verify_properties(&s).unwrap();
                assert!(report.all_passed(), "k={k} {variant}\n{report}");
                assert!(is_admissible(&s.h).unwrap());
                assert_eq!(s.witnesses.len(), k * (k - 1) / 2);
                let back = AdmissibleSet::from_json(&s.to_json()).unwrap();
                assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn tampered_sets_fail() {
        let mut s = build_admissible(3, Variant::Lemma22).unwrap();
        s.rough_parts.clear();
        s.trace.clear();

        // 7 > 6 divides all three differences
        s.h = ints(&[0, 840, 1680]);
        let report = verify_properties(&s).unwrap();
        let iii = report
            .get("(iii) no large prime divides two differences")
            .unwrap();
        assert!(!iii.passed);
        assert!(iii.detail.contains("the prime 7"), "{}", iii.detail);

        // 5 is below the threshold 2k = 6, so {0, 120, 240} has no large
        // primes at all and fails on the missing exact divisors instead
        s.h = ints(&[0, 120, 240]);
        let report = verify_properties(&s).unwrap();
        assert!(
            report
                .get("(iii) no large prime divides two differences")
                .unwrap()
                .passed
        );
        assert!(
            !report
                .get("(ii) exact large-prime divisor for every pair")
                .unwrap()
                .passed
        );
    }

    #[test]
    fn rejects_small_k() {
        assert!(build_admissible(1, Variant::Lemma22).is_err());
        let mut s = build_admissible(2, Variant::Lemma22).unwrap();
        s.k = 1;
        s.h.truncate(1);
        assert!(verify_properties(&s).is_err());
    }
}
