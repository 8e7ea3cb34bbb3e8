//! Sign-pattern and primitive-root predicates on windows of consecutive
//! primes, and the scanning engine that finds the matching indices.

mod checkpoint;
mod record;
mod search;

pub use checkpoint::SearchCheckpoint;
pub use record::{write_bfile_line, MatchRecord, OutputFormat};
pub use search::{find_matches, MatchStream, Progress, SearchConfig, DEFAULT_CHUNK_SPAN};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::arith::{jacobi_u64, valuation_unchecked};
use crate::error::{Error, Result};
use crate::primes::PrimeWindow;
use crate::primroot::{factorize_64, window_pairwise_primroot};

/// Prescribed Legendre symbols for the pairs of a window.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SignPattern {
    /// `(p_{n+i}/p_{n+j}) = d1` and `(p_{n+j}/p_{n+i}) = d2` for all `i < j`.
    Uniform { d1: i8, d2: i8 },
    /// `(p_{n+i}/p_{n+j}) = δ_ij = δ·(p_{n+j}/p_{n+i})` for all `i < j`.
    /// `rows[i][j - i - 1]` holds `δ_ij`.
    Matrix { delta: i8, rows: Vec<Vec<i8>> },
}

fn check_sign(s: i8) -> Result<i8> {
    match s {
        1 | -1 => Ok(s),
        _ => Err(Error::invalid(format!(
            "pattern entries must be +1 or -1, got {s}"
        ))),
    }
}

impl SignPattern {
    pub fn uniform(d1: i8, d2: i8) -> Result<Self> {
        Ok(SignPattern::Uniform {
            d1: check_sign(d1)?,
            d2: check_sign(d2)?,
        })
    }

    /// Matrix pattern for windows of `rows.len() + 1` primes.
    pub fn matrix(delta: i8, rows: Vec<Vec<i8>>) -> Result<Self> {
        check_sign(delta)?;
        let m = rows.len();
        if m == 0 {
            return Err(Error::invalid("matrix pattern needs m >= 1"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m - i {
                return Err(Error::invalid(format!(
                    "matrix row {i} must have {} entries, got {}",
                    m - i,
                    row.len()
                )));
            }
            for &s in row {
                check_sign(s)?;
            }
        }
        Ok(SignPattern::Matrix { delta, rows })
    }

    /// The window size a matrix pattern is tied to; `None` for uniform.
    pub fn fixed_m(&self) -> Option<usize> {
        match self {
            SignPattern::Uniform { .. } => None,
            SignPattern::Matrix { rows, .. } => Some(rows.len()),
        }
    }

    /// Prescribed `((p_i/p_j), (p_j/p_i))` for window positions `i < j`.
    pub fn expected(&self, i: usize, j: usize) -> (i8, i8) {
        debug_assert!(i < j);
        match self {
            SignPattern::Uniform { d1, d2 } => (*d1, *d2),
            SignPattern::Matrix { delta, rows } => {
                let d = rows[i][j - i - 1];
                (d, delta * d)
            }
        }
    }

    /// Reads the matrix file format: a `delta +` or `delta -` line followed by
    /// one line per row `i = 0..m-1` listing `δ_ij` for `j = i+1..=m` as `+`/`-`
    /// characters. Blank lines and `#` comments are ignored.
    pub fn parse_matrix_file(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let delta = match lines
            .next()
            .map(|l| l.split_whitespace().collect::<Vec<_>>())
        {
            Some(v) if v.len() == 2 && v[0] == "delta" => parse_sign_char(v[1])?,
            _ => {
                return Err(Error::Format(
                    "matrix file must start with `delta +` or `delta -`".into(),
                ))
            }
        };
        let rows = lines
            .map(|l| {
                l.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(sign_of_char)
                    .collect()
            })
            .collect::<Result<Vec<Vec<i8>>>>()?;
        Self::matrix(delta, rows)
    }
}

fn sign_of_char(c: char) -> Result<i8> {
    match c {
        '+' => Ok(1),
        '-' => Ok(-1),
        _ => Err(Error::invalid(format!("expected '+' or '-', got {c:?}"))),
    }
}

fn parse_sign_char(s: &str) -> Result<i8> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => sign_of_char(c),
        _ => Err(Error::invalid(format!("expected '+' or '-', got {s:?}"))),
    }
}

fn sign_char(s: i8) -> char {
    if s > 0 {
        '+'
    } else {
        '-'
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignPattern::Uniform { d1, d2 } => write!(f, "{}{}", sign_char(*d1), sign_char(*d2)),
            SignPattern::Matrix { delta, rows } => {
                let rows: Vec<String> = rows
                    .iter()
                    .map(|r| r.iter().map(|&s| sign_char(s)).collect())
                    .collect();
                write!(f, "matrix({};{})", sign_char(*delta), rows.join(","))
            }
        }
    }
}

impl FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(body) = s.strip_prefix("matrix(").and_then(|b| b.strip_suffix(')')) {
            let (d, rows) = body
                .split_once(';')
                .ok_or_else(|| Error::invalid(format!("bad matrix pattern {s:?}")))?;
            let rows = rows
                .split(',')
                .map(|r| r.chars().map(sign_of_char).collect())
                .collect::<Result<Vec<Vec<i8>>>>()?;
            return Self::matrix(parse_sign_char(d)?, rows);
        }
        let cs: Vec<char> = s.chars().collect();
        match cs[..] {
            [a, b] => Self::uniform(sign_of_char(a)?, sign_of_char(b)?),
            _ => Err(Error::invalid(format!(
                "unknown sign pattern {s:?}; expected ++, +-, -+, -- or matrix(...)"
            ))),
        }
    }
}

/// What a window has to satisfy to be reported.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Signs(SignPattern),
    /// Sign pattern plus, for each pair, a prime `p > 2m + 1` exactly
    /// dividing the difference of the two primes.
    SignsStrict(SignPattern),
    /// Every member is a primitive root modulo every other member.
    PrimRoot,
}

impl Predicate {
    pub fn sign_pattern(&self) -> Option<&SignPattern> {
        match self {
            Predicate::Signs(p) | Predicate::SignsStrict(p) => Some(p),
            Predicate::PrimRoot => None,
        }
    }

    /// Smallest admissible starting index: Legendre symbols need odd primes.
    pub fn min_n(&self) -> u64 {
        match self {
            Predicate::PrimRoot => 1,
            _ => 2,
        }
    }

    /// Full evaluation on one window.
    pub fn evaluate(&self, window: &PrimeWindow) -> Result<bool> {
        match self {
            Predicate::Signs(p) => window_matches_signs(window, p),
            Predicate::SignsStrict(p) => {
                Ok(window_matches_signs(window, p)? && window_matches_strict(window).is_ok())
            }
            Predicate::PrimRoot => Ok(window_pairwise_primroot(window)),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Signs(p) => write!(f, "{p}"),
            Predicate::SignsStrict(p) => write!(f, "strict:{p}"),
            Predicate::PrimRoot => f.write_str("primroot"),
        }
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "primroot" {
            Ok(Predicate::PrimRoot)
        } else if let Some(rest) = s.strip_prefix("strict:") {
            Ok(Predicate::SignsStrict(rest.parse()?))
        } else {
            Ok(Predicate::Signs(s.parse()?))
        }
    }
}

fn require_odd_prime_pair(p: u64, q: u64) -> Result<()> {
    if p == q {
        return Err(Error::invalid(format!(
            "pair_signs needs distinct primes, got {p} twice"
        )));
    }
    if p & 1 == 0 || q & 1 == 0 || p < 3 || q < 3 {
        return Err(Error::invalid(format!(
            "pair_signs needs odd primes, got {p}, {q}"
        )));
    }
    Ok(())
}

/// `((p/q), (q/p))` for distinct odd primes.
pub fn pair_signs(p: u64, q: u64) -> Result<(i8, i8)> {
    require_odd_prime_pair(p, q)?;
    if !crate::primes::is_prime_64(p) || !crate::primes::is_prime_64(q) {
        return Err(Error::invalid(format!(
            "pair_signs needs primes, got {p}, {q}"
        )));
    }
    Ok(pair_signs_unchecked(p, q))
}

/// Both symbols from one Jacobi evaluation plus reciprocity.
#[inline]
pub(crate) fn pair_signs_unchecked(p: u64, q: u64) -> (i8, i8) {
    let pq = jacobi_u64(p, q);
    let flip = if p & 3 == 3 && q & 3 == 3 { -1 } else { 1 };
    (pq, pq * flip)
}

fn require_odd_window(window: &PrimeWindow) -> Result<()> {
    if window.primes()[0] == 2 {
        return Err(Error::invalid(
            "Legendre symbols are undefined for windows containing 2",
        ));
    }
    Ok(())
}

/// Whether every pair `i < j` of the window carries the prescribed symbols.
pub fn window_matches_signs(window: &PrimeWindow, pattern: &SignPattern) -> Result<bool> {
    require_odd_window(window)?;
    if let Some(m) = pattern.fixed_m() {
        if m != window.m() {
            return Err(Error::invalid(format!(
                "matrix pattern is for m = {m} but the window has m = {}",
                window.m()
            )));
        }
    }
    let ps = window.primes();
    for j in 1..ps.len() {
        for i in 0..j {
            if pair_signs_unchecked(ps[i], ps[j]) != pattern.expected(i, j) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The first pair of a window without a qualifying exact divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrictFailure {
    pub i: usize,
    pub j: usize,
}

/// Smallest prime `p > 2m + 1` with `p ‖ (p_{n+j} - p_{n+i})`, for every pair.
pub fn window_matches_strict(
    window: &PrimeWindow,
) -> std::result::Result<BTreeMap<(usize, usize), u64>, StrictFailure> {
    let ps = window.primes();
    let floor = 2 * window.m() as u64 + 1;
    let mut out = BTreeMap::new();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            match strict_witness(ps[j] - ps[i], floor) {
                Some(p) => {
                    out.insert((i, j), p);
                }
                None => return Err(StrictFailure { i, j }),
            }
        }
    }
    Ok(out)
}

fn strict_witness(diff: u64, floor: u64) -> Option<u64> {
    if diff < 2 {
        return None;
    }
    let f = factorize_64(diff).ok()?;
    f.factors()
        .iter()
        .find(|&&(p, e)| p > floor && e == 1)
        .map(|&(p, _)| {
            debug_assert_eq!(valuation_unchecked(p, diff), 1);
            p
        })
}

/// All pairwise symbols `(p_{n+i}/p_{n+j})`, zero on the diagonal.
pub fn symbol_matrix(window: &PrimeWindow) -> Result<Vec<Vec<i8>>> {
    require_odd_window(window)?;
    let ps = window.primes();
    Ok(ps
        .iter()
        .map(|&a| {
            ps.iter()
                .map(|&b| if a == b { 0 } else { jacobi_u64(a, b) })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX11: [u64; 7] = [
        2434589, 2434609, 2434613, 2434657, 2434669, 2434673, 2434681,
    ];
    const EX12: [u64; 6] = [33611561, 33611573, 33611603, 33611621, 33611629, 33611653];

    #[test]
    fn pair_signs_examples() {
        assert_eq!(pair_signs(2434589, 2434609).unwrap(), (1, 1));
        assert_eq!(pair_signs(131449631, 131449639).unwrap(), (-1, 1));
        assert!(pair_signs(7, 7).is_err());
        assert!(pair_signs(2, 7).is_err());
        assert!(pair_signs(9, 7).is_err());
        for (p, q) in [(3u64, 7u64), (5, 13), (7, 11), (101, 103)] {
            let (a, b) = pair_signs(p, q).unwrap();
            let expected = if (p - 1) / 2 * ((q - 1) / 2) % 2 == 0 {
                1
            } else {
                -1
            };
            assert_eq!(a * b, expected);
        }
    }

    #[test]
    fn uniform_windows() {
        let w = PrimeWindow::new(178633, EX11.to_vec()).unwrap();
        assert!(window_matches_signs(&w, &SignPattern::uniform(1, 1).unwrap()).unwrap());
        let w = PrimeWindow::new(2066981, EX12.to_vec()).unwrap();
        assert!(window_matches_signs(&w, &SignPattern::uniform(-1, -1).unwrap()).unwrap());
        let w = PrimeWindow::new(2, vec![3, 5]).unwrap();
        assert!(!window_matches_signs(&w, &SignPattern::uniform(1, 1).unwrap()).unwrap());
        let w = PrimeWindow::new(1, vec![2, 3]).unwrap();
        assert!(window_matches_signs(&w, &SignPattern::uniform(1, 1).unwrap()).is_err());
    }

    #[test]
    fn matrix_dimension_and_semantics() {
        let w = PrimeWindow::new(2066981, EX12.to_vec()).unwrap();
        let all_minus = SignPattern::matrix(1, (0..5).map(|i| vec![-1; 5 - i]).collect()).unwrap();
        assert!(window_matches_signs(&w, &all_minus).unwrap());
        let small = SignPattern::matrix(1, vec![vec![-1]]).unwrap();
        assert!(window_matches_signs(&w, &small).is_err());
        assert!(SignPattern::matrix(1, vec![vec![1], vec![1]]).is_err());
        assert!(SignPattern::matrix(2, vec![vec![1]]).is_err());
    }

    #[test]
    fn pattern_strings_round_trip() {
        for s in [
            "++",
            "+-",
            "-+",
            "--",
            "matrix(-;+-,+)",
            "strict:-+",
            "primroot",
        ] {
            let p: Predicate = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("+".parse::<Predicate>().is_err());
        assert!("+*".parse::<Predicate>().is_err());
        assert!("matrix(+;+,+)".parse::<Predicate>().is_err());
        let file = "# two rows\ndelta -\n+ -\n+\n";
        let p = SignPattern::parse_matrix_file(file).unwrap();
        assert_eq!(p.to_string(), "matrix(-;+-,+)");
        assert!(SignPattern::parse_matrix_file("++\n").is_err());
    }

    #[test]
    fn strict_condition() {
        let w = PrimeWindow::new(2, vec![3, 5]).unwrap();
        assert_eq!(window_matches_strict(&w), Err(StrictFailure { i: 0, j: 1 }));
        // differences 20, 24, ...: 20 = 2^2 * 5 and 5 <= 13
        let w = PrimeWindow::new(178633, EX11.to_vec()).unwrap();
        assert_eq!(window_matches_strict(&w), Err(StrictFailure { i: 0, j: 1 }));
        // 29 - 11 = 18 = 2 * 3^2
        assert_eq!(strict_witness(18, 3), None);
        // 97 - 89 = 8; 113 - 103 = 10 = 2 * 5 with 5 > 3
        assert_eq!(strict_witness(10, 3), Some(5));
        assert_eq!(strict_witness(2 * 5 * 5 * 7 * 11, 3), Some(7));
    }

    #[test]
    fn symbol_matrices() {
        let w = PrimeWindow::new(178633, EX11.to_vec()).unwrap();
        let s = symbol_matrix(&w).unwrap();
        for (i, row) in s.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 0 } else { 1 });
            }
        }
        let w = PrimeWindow::new(2066981, EX12.to_vec()).unwrap();
        let s = symbol_matrix(&w).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_eq!(s[i][j], -1);
                    let (pi, pj) = (EX12[i], EX12[j]);
                    let sign = if (pi - 1) / 2 * ((pj - 1) / 2) % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    assert_eq!(s[i][j] * s[j][i], sign);
                }
            }
        }
    }
}
