//! Residue certificates: a modulus `W` and a residue `b` such that the
//! Legendre symbols between any two primes of the form `Wn + b + h_s` are
//! fixed by congruences alone.
//!
//! Two flavours exist. `thm13` takes a set built with the `2k` threshold and
//! a sign pair `(δ₁, δ₂)`, and forces `(p/q) = δ₁`, `(q/p) = δ₂` for every pair
//! of primes `p < q` in the progression window. `lemma32` takes a set built
//! with the `4k` threshold and forces `((h_i - h_j)/(b + h_j)) = -1` for all
//! `i != j`, which is what the primitive-root argument needs.
//!
//! Both also cover the gap set: every integer offset between `h_1` and `h_k`
//! that is not in the set gets a prime (or, for `lemma32`, sometimes 4) that
//! divides `Wn + b + a` for every `n`, so prime members of a window are
//! consecutive primes.

mod scan;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::admissible::{base_modulus, AdmissibleSet, Variant};
use crate::arith::{crt_solve, jacobi, jacobi_big, rem_u64, valuation_unchecked, CongruenceSystem};
use crate::error::{Error, Result};
use crate::primes::{is_prime_64, simple_sieve};
use crate::primroot::factorize_64;
use crate::report::Report;
use crate::serde_dec;

pub use scan::{
    scan_progression, scan_progression_with, PairSymbols, PrimalityMode, ScanConfig, ScanEntry,
    ScanHit, ScanOutcome, ScanProgress, ScanStats,
};

/// Largest cutoff `w` accepted; the certificate needs every prime up to `w`.
pub const MAX_CUTOFF: u64 = 2_000_000;

pub const CERT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertVariant {
    Thm13,
    Lemma32,
}

impl CertVariant {
    /// The admissible-set construction this certificate builds on.
    pub fn set_variant(self) -> Variant {
        match self {
            CertVariant::Thm13 => Variant::Lemma22,
            CertVariant::Lemma32 => Variant::Lemma31,
        }
    }
}

impl fmt::Display for CertVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertVariant::Thm13 => "thm13",
            CertVariant::Lemma32 => "lemma32",
        })
    }
}

impl FromStr for CertVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm13" => Ok(CertVariant::Thm13),
            "lemma32" => Ok(CertVariant::Lemma32),
            _ => Err(Error::invalid(format!(
                "unknown certificate variant {s:?}; use thm13 or lemma32"
            ))),
        }
    }
}

/// The cutoff `w`: every prime up to `w` enters `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// The smallest `w >= h_k` leaving enough primes in `(h_k, w]` to cover
    /// the gap set.
    Auto,
    Fixed(u64),
}

impl FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Cutoff::Auto);
        }
        s.parse().map(Cutoff::Fixed).map_err(|_| {
            Error::invalid(format!("cutoff must be \"auto\" or an integer, got {s:?}"))
        })
    }
}

/// Parameters of [`build_certificate`]. `m` and the signs only matter for
/// `thm13`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertParams {
    pub m: usize,
    pub delta1: i8,
    pub delta2: i8,
    pub w: Cutoff,
}

impl Default for CertParams {
    fn default() -> Self {
        CertParams {
            m: 1,
            delta1: 1,
            delta2: 1,
            w: Cutoff::Auto,
        }
    }
}

/// Residue `r_p` for a prime `p` above the threshold dividing `h_j - h_i`;
/// the certificate enforces `b ≡ r_p - h_i (mod p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargePrimeResidue {
    pub p: u64,
    pub i: usize,
    pub j: usize,
    /// Whether `p` is the pair's planted witness.
    pub witness: bool,
    pub target: i8,
    pub r: u64,
}

/// `b ≡ -a (mod q)`: `q` divides `Wn + b + a` for every `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCover {
    pub a: u64,
    pub q: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QResidue {
    pub q: u64,
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub variant: CertVariant,
    pub set: AdmissibleSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<i8>,
    pub w: u64,
    #[serde(rename = "W", with = "serde_dec")]
    pub modulus: BigInt,
    #[serde(with = "serde_dec")]
    pub b: BigInt,
    pub large_primes: Vec<LargePrimeResidue>,
    /// Gap offsets with their covering primes, both ascending.
    pub gap: Vec<GapCover>,
    /// `lemma32` only: offsets `h_s - 1`, where `4 | Wn + b + a`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gap_by_four: Vec<u64>,
    pub q_residues: Vec<QResidue>,
}

impl Certificate {
    pub fn delta(&self) -> Option<i8> {
        Some(self.delta1? * self.delta2?)
    }

    pub fn h_u64(&self) -> Result<Vec<u64>> {
        small_h(&self.set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cert: Certificate = serde_json::from_str(text)?;
        if cert.version != CERT_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "certificate format version {} is not supported",
                cert.version
            )));
        }
        if cert.set.h.len() != cert.set.k || cert.set.k < 2 {
            return Err(Error::Format(
                "certificate set: h must have k >= 2 entries".into(),
            ));
        }
        Ok(cert)
    }
}

/// How `choose_rp` forbids residues and evaluates the target symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpMode {
    /// Forbid `h_i - h_s`; require `(r·δ / p) = target`.
    Thm13 { delta: i8 },
    /// Forbid `h_i - h_s` and `h_i - h_s + 1`; require `(r/p) = target`.
    Lemma32,
}

/// Smallest `r` in `[0, p)` avoiding the forbidden offsets with the required
/// symbol.
pub fn choose_rp(p: u64, i: usize, h: &[u64], target: i8, mode: RpMode) -> Result<u64> {
    if !is_prime_64(p) || p < 3 {
        return Err(Error::invalid(format!("r_p needs an odd prime, got {p}")));
    }
    if i >= h.len() {
        return Err(Error::invalid(format!(
            "index {i} outside a set of {} elements",
            h.len()
        )));
    }
    if target.abs() != 1 {
        return Err(Error::invalid(format!(
            "target symbol must be +1 or -1, got {target}"
        )));
    }
    let k = h.len() as u64;
    let (delta, room) = match mode {
        RpMode::Thm13 { delta } => {
            if delta.abs() != 1 {
                return Err(Error::invalid(format!(
                    "delta must be +1 or -1, got {delta}"
                )));
            }
            (delta, k.saturating_sub(2) < (p - 3) / 2)
        }
        RpMode::Lemma32 => (1, 2 * (k - 1) < (p - 1) / 2),
    };
    if !room {
        return Err(Error::invalid(format!(
            "p = {p} is too small for {k} elements to leave a residue free"
        )));
    }
    let mut forbidden = vec![false; p as usize];
    for &hs in h {
        let d = (h[i] % p + p - hs % p) % p;
        forbidden[d as usize] = true;
        if mode == RpMode::Lemma32 {
            forbidden[((d + 1) % p) as usize] = true;
        }
    }
    (1..p)
        .find(|&r| {
            !forbidden[r as usize] && jacobi(r as i128 * delta as i128, p).ok() == Some(target)
        })
        .ok_or_else(|| Error::invalid(format!("no admissible r_p modulo {p}")))
}

/// The target symbol `(r_p / p)` (times `δ` for `thm13`) for a large prime of
/// the pair `(i, j)`.
///
/// For `lemma32` the witness target is `-(-1)^{ord_3(h_j - h_i)}`: the factor
/// 3 of `h_j - h_i` contributes `(3 / b + h_j) = (2/3) = -1` per power since
/// `b + h_j ≡ 2 (mod 3)`, and the witness has to cancel it.
pub fn rp_target(variant: CertVariant, witness: bool, delta2: i8, diff: u64) -> i8 {
    match (variant, witness) {
        (_, false) => 1,
        (CertVariant::Thm13, true) => delta2,
        (CertVariant::Lemma32, true) => {
            if valuation_unchecked(3, diff).is_multiple_of(2) {
                -1
            } else {
                1
            }
        }
    }
}

fn small_h(set: &AdmissibleSet) -> Result<Vec<u64>> {
    set.h
        .iter()
        .map(|x| {
            x.to_u64().filter(|&v| v <= MAX_CUTOFF).ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "h_k = {} needs a cutoff w >= h_k above the limit {MAX_CUTOFF}",
                    set.diameter()
                ))
            })
        })
        .collect()
}

/// Primes above `threshold` dividing some `h_j - h_i`, each with its unique
/// pair. Fails if a prime divides two differences.
fn large_prime_pairs(h: &[u64], threshold: u64) -> Result<Vec<(u64, usize, usize)>> {
    let mut out: Vec<(u64, usize, usize)> = Vec::new();
    for j in 0..h.len() {
        for i in 0..j {
            for p in factorize_64(h[j] - h[i])?
                .primes()
                .filter(|&p| p > threshold)
            {
                if let Some(&(_, s, t)) = out.iter().find(|e| e.0 == p) {
                    return Err(Error::invalid(format!(
                        "{p} divides both h_{} - h_{} and h_{} - h_{}",
                        t + 1,
                        s + 1,
                        j + 1,
                        i + 1
                    )));
                }
                out.push((p, i, j));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// The gap set and, for `lemma32`, the offsets covered by 4.
fn gap_sets(h: &[u64], variant: CertVariant) -> (Vec<u64>, Vec<u64>) {
    let hk = *h.last().expect("nonempty");
    let in_h = |a: u64| h.binary_search(&a).is_ok();
    match variant {
        CertVariant::Thm13 => ((0..=hk).filter(|&a| !in_h(a)).collect(), Vec::new()),
        CertVariant::Lemma32 => {
            let below = |a: u64| in_h(a + 1);
            (
                (1..hk).filter(|&a| !in_h(a) && !below(a)).collect(),
                (0..hk).filter(|&a| !in_h(a) && below(a)).collect(),
            )
        }
    }
}

/// Smallest residue modulo `q` avoiding `-h_i` (and `-h_i + 1` for `lemma32`).
fn q_residue(q: u64, h: &[u64], variant: CertVariant) -> Option<u64> {
    let mut forbidden = vec![false; q as usize];
    for &x in h {
        let neg = (q - x % q) % q;
        forbidden[neg as usize] = true;
        if variant == CertVariant::Lemma32 {
            forbidden[((neg + 1) % q) as usize] = true;
        }
    }
    (0..q).find(|&r| !forbidden[r as usize])
}

/// The smallest `w >= h_k` with at least `needed` primes in `(h_k, w]`.
pub fn minimal_cutoff(h_k: u64, needed: usize) -> Result<u64> {
    if needed == 0 {
        return Ok(h_k);
    }
    let mut limit = (h_k.max(16) * 2).min(MAX_CUTOFF);
    loop {
        let above: Vec<u64> = simple_sieve(limit)
            .into_iter()
            .filter(|&p| p > h_k)
            .collect();
        if above.len() >= needed {
            return Ok(above[needed - 1]);
        }
        if limit == MAX_CUTOFF {
            return Err(Error::ResourceLimit(format!(
                "covering {needed} gap offsets needs primes beyond the cutoff limit {MAX_CUTOFF}"
            )));
        }
        limit = (limit * 2).min(MAX_CUTOFF);
    }
}

fn delta_residue(delta: i8, modulus: &BigInt) -> BigInt {
    BigInt::from(delta).mod_floor(modulus)
}

/// `4·∏_{p <= w} p` (`thm13`) or `lcm(h_j - h_i, ∏_{2 < p <= w} p)` (`lemma32`).
pub fn certificate_modulus(variant: CertVariant, h: &[u64], w: u64) -> BigInt {
    let odd: BigInt = simple_sieve(w)
        .into_iter()
        .filter(|&p| p > 2)
        .map(BigInt::from)
        .product();
    match variant {
        CertVariant::Thm13 => odd * 8,
        CertVariant::Lemma32 => {
            let mut l = odd;
            for j in 0..h.len() {
                for i in 0..j {
                    l = l.lcm(&BigInt::from(h[j] - h[i]));
                }
            }
            l
        }
    }
}

fn check_sign(name: &str, s: i8) -> Result<i8> {
    if s.abs() == 1 {
        Ok(s)
    } else {
        Err(Error::invalid(format!("{name} must be +1 or -1, got {s}")))
    }
}

/// Assembles and solves the congruence system for `b`.
pub fn build_certificate(
    set: &AdmissibleSet,
    variant: CertVariant,
    params: &CertParams,
) -> Result<Certificate> {
    if set.variant != variant.set_variant() {
        return Err(Error::invalid(format!(
            "{variant} certificates need a {} set, got {}",
            variant.set_variant(),
            set.variant
        )));
    }
    let k = set.k;
    if k < 2 || set.h.len() != k {
        return Err(Error::invalid("the admissible set needs k >= 2 elements"));
    }
    let (d1, d2) = (
        check_sign("delta1", params.delta1)?,
        check_sign("delta2", params.delta2)?,
    );
    if variant == CertVariant::Thm13 && (params.m == 0 || params.m >= k) {
        return Err(Error::invalid(format!(
            "m must satisfy 1 <= m < k = {k}, got {}",
            params.m
        )));
    }
    let delta = d1 * d2;
    let h = small_h(set)?;
    let h_k = *h.last().expect("k >= 2");
    let threshold = set.threshold();

    let (gap, gap_by_four) = gap_sets(&h, variant);
    let w = match params.w {
        Cutoff::Auto => minimal_cutoff(h_k, gap.len())?,
        Cutoff::Fixed(w) => {
            if w > MAX_CUTOFF {
                return Err(Error::ResourceLimit(format!(
                    "cutoff {w} is above the limit {MAX_CUTOFF}"
                )));
            }
            w
        }
    };
    let primes = simple_sieve(w.max(h_k));
    let covering: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&p| p > h_k && p <= w)
        .collect();
    if w < h_k || covering.len() < gap.len() {
        return Err(Error::InsufficientCutoff {
            w,
            required: gap.len(),
            available: covering.len(),
        });
    }

    let mut system = CongruenceSystem::new();
    // (1)
    match variant {
        CertVariant::Thm13 => {
            let kk = base_modulus(threshold);
            system.add(delta_residue(delta, &kk), kk)?;
        }
        CertVariant::Lemma32 => {
            system.add(17, 24)?;
            for p in primes
                .iter()
                .copied()
                .filter(|&p| p >= 5 && p <= 4 * k as u64)
            {
                system.add(4, p)?;
            }
        }
    }
    // (2)
    let mode = match variant {
        CertVariant::Thm13 => RpMode::Thm13 { delta },
        CertVariant::Lemma32 => RpMode::Lemma32,
    };
    let mut large_primes = Vec::new();
    for (p, i, j) in large_prime_pairs(&h, threshold)? {
        let witness = set.witness(i, j) == Some(p);
        let target = rp_target(variant, witness, d2, h[j] - h[i]);
        let r = choose_rp(p, i, &h, target, mode)?;
        system.add(BigInt::from(r) - h[i], p)?;
        large_primes.push(LargePrimeResidue {
            p,
            i,
            j,
            witness,
            target,
            r,
        });
    }
    // (3)
    let gap: Vec<GapCover> = gap
        .iter()
        .zip(&covering)
        .map(|(&a, &q)| GapCover { a, q })
        .collect();
    for g in &gap {
        system.add(-BigInt::from(g.a), g.q)?;
    }
    // (4)
    let mut q_residues = Vec::new();
    for &q in primes.iter().filter(|&&p| p > threshold && p <= w) {
        if large_primes.iter().any(|l| l.p == q) || gap.iter().any(|g| g.q == q) {
            continue;
        }
        let r = q_residue(q, &h, variant)
            .ok_or_else(|| Error::invalid(format!("no free residue modulo {q}")))?;
        system.add(r, q)?;
        q_residues.push(QResidue { q, r });
    }

    let sol = crt_solve(&system)?;
    let modulus = certificate_modulus(variant, &h, w);
    debug_assert!(modulus.is_multiple_of(sol.modulus()));
    let (m, delta1, delta2) = match variant {
        CertVariant::Thm13 => (Some(params.m), Some(d1), Some(d2)),
        CertVariant::Lemma32 => (None, None, None),
    };
    Ok(Certificate {
        version: CERT_FORMAT_VERSION,
        variant,
        set: set.clone(),
        m,
        delta1,
        delta2,
        w,
        modulus,
        b: sol.residue().clone(),
        large_primes,
        gap,
        gap_by_four,
        q_residues,
    })
}

/// Re-derives every claim of the certificate from `b`, `W` and the set.
pub fn verify_certificate(cert: &Certificate) -> Result<Report> {
    let mut report = Report::new();
    let variant = cert.variant;
    let set = &cert.set;
    let h = small_h(set)?;
    let k = h.len();
    if k < 2 || k != set.k {
        return Err(Error::Format(
            "certificate set: h must have k >= 2 entries".into(),
        ));
    }
    let h_k = h[k - 1];
    let threshold = set.threshold();
    let b = &cert.b;
    let w = cert.w;

    let (d1, d2) = match variant {
        CertVariant::Thm13 => match (cert.delta1, cert.delta2, cert.m) {
            (Some(d1), Some(d2), Some(m)) if d1.abs() == 1 && d2.abs() == 1 && m >= 1 && m < k => {
                (d1, d2)
            }
            _ => {
                return Err(Error::Format(
                    "thm13 certificates need m in [1, k) and signs in {+1, -1}".into(),
                ))
            }
        },
        CertVariant::Lemma32 => (1, 1),
    };
    let delta = d1 * d2;

    let mut structure = None;
    if set.variant != variant.set_variant() {
        structure = Some(format!("{variant} needs a {} set", variant.set_variant()));
    } else if w < h_k || w > MAX_CUTOFF {
        structure = Some(format!("cutoff w = {w} is outside [h_k, {MAX_CUTOFF}]"));
    } else if b.sign() == num_bigint::Sign::Minus || b >= &cert.modulus {
        structure = Some("b is not in [0, W)".to_string());
    }
    let structural_ok = structure.is_none();
    report.record("structure", structure);
    if !structural_ok {
        return Ok(report);
    }

    let expected_w = certificate_modulus(variant, &h, w);
    report.record(
        "W recomputed from w",
        (expected_w != cert.modulus)
            .then(|| format!("W does not match the {variant} formula for w = {w}")),
    );

    // (1)
    let cond1 = match variant {
        CertVariant::Thm13 => {
            let kk = base_modulus(threshold);
            (b.mod_floor(&kk) != delta_residue(delta, &kk))
                .then(|| format!("b is not {delta} mod K = {kk}"))
        }
        CertVariant::Lemma32 => {
            if rem_u64(b, 24) != 17 {
                Some("b is not 17 mod 24".to_string())
            } else {
                simple_sieve(4 * k as u64)
                    .into_iter()
                    .filter(|&p| p >= 5)
                    .find(|&p| rem_u64(b, p) != 4)
                    .map(|p| format!("b is not 4 mod {p}"))
            }
        }
    };
    report.record("(1) small-prime residues", cond1);

    // (2)
    let cond2 = match large_prime_pairs(&h, threshold) {
        Err(e) => Some(e.to_string()),
        Ok(expected) => {
            let listed: Vec<(u64, usize, usize)> =
                cert.large_primes.iter().map(|l| (l.p, l.i, l.j)).collect();
            if listed != expected {
                Some(
                    "large-prime table does not list exactly the primes dividing the differences"
                        .into(),
                )
            } else {
                cert.large_primes
                    .iter()
                    .find_map(|l| check_large_prime(cert, l, &h, d2, delta))
            }
        }
    };
    report.record("(2) large-prime residues", cond2);

    // (3)
    let (gap, four) = gap_sets(&h, variant);
    let cond3 = if cert.gap.iter().map(|g| g.a).ne(gap.iter().copied()) {
        Some("gap table does not list the gap set".to_string())
    } else if cert.gap_by_four != four {
        Some("offsets h_s - 1 recorded incorrectly".to_string())
    } else if cert.gap.windows(2).any(|x| x[0].q >= x[1].q) {
        Some("covering primes are not strictly ascending".to_string())
    } else {
        cert.gap.iter().find_map(|g| {
            if !is_prime_64(g.q) || g.q <= h_k || g.q > w {
                Some(format!(
                    "covering modulus {} is not a prime in (h_k, w]",
                    g.q
                ))
            } else if (b + g.a) % g.q != BigInt::zero() {
                Some(format!("b is not -{} mod {}", g.a, g.q))
            } else {
                None
            }
        })
    };
    report.record("(3) gap covering", cond3);

    // (4)
    let expected_q: Vec<u64> = simple_sieve(w)
        .into_iter()
        .filter(|&p| p > threshold)
        .filter(|&p| {
            !cert.large_primes.iter().any(|l| l.p == p) && !cert.gap.iter().any(|g| g.q == p)
        })
        .collect();
    let cond4 = if cert
        .q_residues
        .iter()
        .map(|q| q.q)
        .ne(expected_q.iter().copied())
    {
        Some("Q table does not list the remaining primes in (threshold, w]".to_string())
    } else {
        cert.q_residues.iter().find_map(|q| {
            if rem_u64(b, q.q) != q.r {
                Some(format!("b is not {} mod {}", q.r, q.q))
            } else if h.iter().any(|&x| {
                (q.r + x) % q.q == 0 || (variant == CertVariant::Lemma32 && (q.r + x) % q.q == 1)
            }) {
                Some(format!("r_q = {} is a forbidden residue mod {}", q.r, q.q))
            } else {
                None
            }
        })
    };
    report.record("(4) remaining primes", cond4);

    let product: BigInt = h.iter().map(|&x| b + x).product();
    report.record(
        "gcd(prod (b + h_s), W) = 1",
        (!product.gcd(&cert.modulus).is_one())
            .then(|| "b + h_s shares a factor with W".to_string()),
    );
    if variant == CertVariant::Lemma32 {
        let odd: BigInt = simple_sieve(w)
            .into_iter()
            .filter(|&p| p > 2)
            .map(BigInt::from)
            .product();
        let shifted: BigInt = h.iter().map(|&x| b + x - 1).product();
        report.record(
            "gcd(prod (b + h_s - 1), prod odd p <= w) = 1",
            (!shifted.gcd(&odd).is_one())
                .then(|| "b + h_s - 1 has an odd prime factor up to w".to_string()),
        );
        report.record(
            "b + h_s = 1 mod 8",
            h.iter()
                .position(|&x| rem_u64(&(b + x), 8) != 1)
                .map(|s| format!("b + h_{} is not 1 mod 8", s + 1)),
        );
    }

    report.record("symbol prediction", symbol_prediction(cert, &h, d1, d2));
    Ok(report)
}

fn check_large_prime(
    cert: &Certificate,
    l: &LargePrimeResidue,
    h: &[u64],
    d2: i8,
    delta: i8,
) -> Option<String> {
    let p = l.p;
    let witness = cert.set.witness(l.i, l.j) == Some(p);
    if witness != l.witness {
        return Some(format!("witness flag of {p} is wrong"));
    }
    let target = rp_target(cert.variant, witness, d2, h[l.j] - h[l.i]);
    if target != l.target {
        return Some(format!("target symbol for {p} should be {target}"));
    }
    let lemma = cert.variant == CertVariant::Lemma32;
    let forbidden = h.iter().any(|&hs| {
        let d = (h[l.i] % p + p - hs % p) % p;
        l.r % p == d || (lemma && l.r % p == (d + 1) % p)
    });
    if forbidden {
        return Some(format!("r_p = {} is forbidden modulo {p}", l.r));
    }
    let sym_arg = if lemma {
        l.r as i128
    } else {
        l.r as i128 * delta as i128
    };
    if jacobi(sym_arg, p).ok() != Some(target) {
        return Some(format!("r_p = {} has the wrong symbol modulo {p}", l.r));
    }
    let want = (BigInt::from(l.r) - h[l.i]).mod_floor(&BigInt::from(p));
    (b_mod(cert, p) != want).then(|| format!("b is not r_p - h_{} mod {p}", l.i + 1))
}

fn b_mod(cert: &Certificate, p: u64) -> BigInt {
    cert.b.mod_floor(&BigInt::from(p))
}

/// Thm13: for `i < j`, `δ · ∏_{p | h_ij} (δ^{(p-1)/2} (b + h_j / p))^{e_p} = δ₁`,
/// and the direct Jacobi symbols of `b + h_i`, `b + h_j` equal `(δ₁, δ₂)`.
/// Lemma32: `((h_i - h_j)/(b + h_j)) = -1` for all ordered pairs.
fn symbol_prediction(cert: &Certificate, h: &[u64], d1: i8, d2: i8) -> Option<String> {
    let b = &cert.b;
    let delta = d1 * d2;
    for j in 0..h.len() {
        for i in 0..h.len() {
            if i == j {
                continue;
            }
            let bj = b + h[j];
            match cert.variant {
                CertVariant::Lemma32 => {
                    let diff = BigInt::from(h[i]) - h[j];
                    if jacobi_big(&diff, &bj).ok() != Some(-1) {
                        return Some(format!(
                            "((h_{} - h_{}) / (b + h_{})) is not -1",
                            i + 1,
                            j + 1,
                            j + 1
                        ));
                    }
                }
                CertVariant::Thm13 if i < j => {
                    let odd = crate::arith::odd_part_u64(h[j] - h[i]);
                    let f = match odd {
                        1 => Vec::new(),
                        _ => match factorize_64(odd) {
                            Ok(f) => f.factors().to_vec(),
                            Err(e) => return Some(e.to_string()),
                        },
                    };
                    let chain: i8 = f
                        .iter()
                        .map(|&(p, e)| {
                            let twist = if delta == -1 && p % 4 == 3 { -1 } else { 1 };
                            let s = twist * jacobi_big(&bj, &BigInt::from(p)).unwrap_or(0);
                            if e % 2 == 0 {
                                s * s
                            } else {
                                s
                            }
                        })
                        .product();
                    if delta * chain != d1 {
                        return Some(format!(
                            "reciprocity chain for pair ({}, {}) gives {}",
                            i + 1,
                            j + 1,
                            delta * chain
                        ));
                    }
                    let bi = b + h[i];
                    let direct = (jacobi_big(&bi, &bj).ok(), jacobi_big(&bj, &bi).ok());
                    if direct != (Some(d1), Some(d2)) {
                        return Some(format!(
                            "Jacobi symbols of b + h_{} and b + h_{} are {:?}",
                            i + 1,
                            j + 1,
                            direct
                        ));
                    }
                }
                CertVariant::Thm13 => {}
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::build_admissible;

    #[test]
    fn choose_rp_examples() {
        let h = [0, 120];
        assert_eq!(
            choose_rp(5, 0, &h, 1, RpMode::Thm13 { delta: 1 }).unwrap(),
            1
        );
        assert_eq!(
            choose_rp(5, 0, &h, -1, RpMode::Thm13 { delta: 1 }).unwrap(),
            2
        );
        assert_eq!(rp_target(CertVariant::Lemma32, true, 1, 120), 1);
        assert!(choose_rp(4, 0, &h, 1, RpMode::Lemma32).is_err());
    }

    #[test]
    fn cutoff_feasibility() {
        let set = build_admissible(2, Variant::Lemma22).unwrap();
        let params = |w| CertParams {
            w,
            ..CertParams::default()
        };
        match build_certificate(&set, CertVariant::Thm13, &params(Cutoff::Fixed(700))) {
            Err(Error::InsufficientCutoff {
                required,
                available,
                ..
            }) => {
                assert_eq!((required, available), (119, 95));
            }
            other => panic!("expected InsufficientCutoff, got {other:?}"),
        }
        build_certificate(&set, CertVariant::Thm13, &params(Cutoff::Fixed(1000))).unwrap();
        let auto = build_certificate(&set, CertVariant::Thm13, &params(Cutoff::Auto)).unwrap();
        assert_eq!(auto.w, 859);
        assert!(build_certificate(&set, CertVariant::Lemma32, &params(Cutoff::Auto)).is_err());
    }

    #[test]
    fn thm13_all_sign_pairs_verify() {
        let set = build_admissible(2, Variant::Lemma22).unwrap();
        for (d1, d2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let cert = build_certificate(
                &set,
                CertVariant::Thm13,
                &CertParams {
                    m: 1,
                    delta1: d1,
                    delta2: d2,
                    w: Cutoff::Auto,
                },
            )
            .unwrap();
            let report = verify_certificate(&cert).unwrap();
            assert!(report.all_passed(), "({d1},{d2})\n{report}");
            assert_eq!(cert.gap.len(), 119);
            let back = Certificate::from_json(&cert.to_json()).unwrap();
            assert_eq!(back, cert);
        }
    }

    #[test]
    fn perturbed_b_is_caught() {
        let set = build_admissible(2, Variant::Lemma22).unwrap();
        let mut cert = build_certificate(&set, CertVariant::Thm13, &CertParams::default()).unwrap();
        cert.b = (&cert.b + &set.modulus).mod_floor(&cert.modulus);
        let report = verify_certificate(&cert).unwrap();
        assert!(report.get("(1) small-prime residues").unwrap().passed);
        assert!(!report.get("(2) large-prime residues").unwrap().passed);
        let gap = report.get("(3) gap covering").unwrap();
        assert!(!gap.passed);
        assert!(gap.detail.contains("mod 127"), "{}", gap.detail);
        assert!(!report.get("(4) remaining primes").unwrap().passed);
    }

    #[test]
    fn gap_sets_by_variant() {
        let (s, four) = gap_sets(&[0, 6, 10], CertVariant::Lemma32);
        assert_eq!(s, vec![1, 2, 3, 4, 7, 8]);
        assert_eq!(four, vec![5, 9]);
        let (s, four) = gap_sets(&[0, 4], CertVariant::Thm13);
        assert_eq!(s, vec![1, 2, 3]);
        assert!(four.is_empty());
    }

    #[test]
    fn lemma32_k2_builds_and_verifies() {
        let set = build_admissible(2, Variant::Lemma31).unwrap();
        let cert = build_certificate(&set, CertVariant::Lemma32, &CertParams::default()).unwrap();
        assert_eq!(cert.gap.len(), 9238);
        assert_eq!(cert.gap_by_four, vec![9239]);
        assert_eq!(rem_u64(&cert.b, 24), 17);
        let report = verify_certificate(&cert).unwrap();
        assert!(report.all_passed(), "{report}");
        let b = &cert.b;
        for (i, j) in [(0usize, 1usize), (1, 0)] {
            let diff = &set.h[i] - &set.h[j];
            assert_eq!(jacobi_big(&diff, &(b + &set.h[j])).unwrap(), -1);
        }
    }

    #[test]
    fn witness_target_cancels_the_factor_three() {
        // 9240 = 2^3 * 3 * 5 * 7 * 11 with witness 11. With b + h_j = 2 (mod 3)
        // the factor 3 contributes -1, so the witness must contribute +1.
        assert_eq!(rp_target(CertVariant::Lemma32, true, 1, 9240), 1);
        // twisting by (3/p) instead would ask for -(3/11) = -1 and flip the product
        assert_eq!(jacobi(3, 11).unwrap(), 1);
        assert_eq!(jacobi(2, 3).unwrap(), -1);
        // an even power of 3 needs the witness itself to supply the -1
        assert_eq!(rp_target(CertVariant::Lemma32, true, 1, 9 * 11 * 8), -1);
    }
}
