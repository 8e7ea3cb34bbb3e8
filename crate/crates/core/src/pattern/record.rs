use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{window_matches_strict, Predicate};
use crate::error::{Error, Result};
use crate::primes::PrimeWindow;

/// One matching window as emitted by a search.
///
/// JSON-lines form: `{"n":…,"primes":[…],"pattern":"++","witnesses":{"0,1":5,…}}`;
/// `witnesses` only appears for strict predicates and maps a pair `"i,j"` to
/// the smallest prime `p > 2m + 1` with `p ‖ (p_{n+j} - p_{n+i})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub n: u64,
    pub primes: Vec<u64>,
    #[serde(with = "predicate_str")]
    pub pattern: Predicate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<BTreeMap<String, u64>>,
}

mod predicate_str {
    use super::Predicate;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Predicate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Predicate, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

fn pair_key(i: usize, j: usize) -> String {
    format!("{i},{j}")
}

impl MatchRecord {
    pub fn from_window(window: &PrimeWindow, predicate: &Predicate) -> Self {
        let witnesses = match predicate {
            Predicate::SignsStrict(_) => window_matches_strict(window).ok().map(|w| {
                w.into_iter()
                    .map(|((i, j), p)| (pair_key(i, j), p))
                    .collect()
            }),
            _ => None,
        };
        MatchRecord {
            n: window.n(),
            primes: window.primes().to_vec(),
            pattern: predicate.clone(),
            witnesses,
        }
    }

    /// The stored primes as a window, checked for primality and
    /// consecutiveness.
    pub fn window(&self) -> Result<PrimeWindow> {
        PrimeWindow::new(self.n, self.primes.clone())
    }

    /// Recomputes the predicate (and witnesses, if any) from the stored primes.
    pub fn verify(&self) -> Result<()> {
        let w = self.window()?;
        if !self.pattern.evaluate(&w)? {
            return Err(Error::Format(format!(
                "record n = {} does not satisfy pattern {}",
                self.n, self.pattern
            )));
        }
        let fresh = MatchRecord::from_window(&w, &self.pattern);
        if fresh.witnesses != self.witnesses {
            return Err(Error::Format(format!(
                "record n = {} carries witnesses that differ from the recomputed ones",
                self.n
            )));
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("match records always serialize")
    }

    /// Parses one JSON line and re-verifies it.
    pub fn from_json_line(line: &str) -> Result<Self> {
        let rec: MatchRecord = serde_json::from_str(line)?;
        rec.verify()?;
        Ok(rec)
    }

    pub const CSV_HEADER: &'static str = "n,primes,pattern,witnesses";

    /// `n,primes,pattern,witnesses` with space-separated primes and
    /// `i-j:p` witness entries.
    pub fn to_csv_row(&self) -> String {
        let primes: Vec<String> = self.primes.iter().map(u64::to_string).collect();
        let witnesses: Vec<String> = self
            .witnesses
            .iter()
            .flatten()
            .map(|(k, p)| format!("{}:{p}", k.replace(',', "-")))
            .collect();
        format!(
            "{},{},{},{}",
            self.n,
            primes.join(" "),
            self.pattern,
            witnesses.join(" ")
        )
    }
}

/// One line of an OEIS b-file: `<index> <value>`.
pub fn write_bfile_line(index: u64, value: u64) -> String {
    format!("{index} {value}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Jsonl,
    Csv,
    Bfile,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "csv" => Ok(OutputFormat::Csv),
            "bfile" => Ok(OutputFormat::Bfile),
            _ => Err(Error::invalid(format!(
                "unknown output format {s:?}; use jsonl, csv or bfile"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(pattern: &str, n: u64, primes: &[u64]) -> MatchRecord {
        let w = PrimeWindow::new(n, primes.to_vec()).unwrap();
        MatchRecord::from_window(&w, &pattern.parse().unwrap())
    }

    #[test]
    fn json_round_trip_and_reverification() {
        let r = rec(
            "--",
            2066981,
            &[33611561, 33611573, 33611603, 33611621, 33611629, 33611653],
        );
        let line = r.to_json_line();
        assert!(line.starts_with("{\"n\":2066981,\"primes\":[33611561,"));
        assert!(!line.contains("witnesses"));
        assert_eq!(MatchRecord::from_json_line(&line).unwrap(), r);

        let forged = line.replace("\"--\"", "\"++\"");
        assert!(MatchRecord::from_json_line(&forged).is_err());
        let gap = line.replace("33611573,", "");
        assert!(MatchRecord::from_json_line(&gap).is_err());
    }

    #[test]
    fn strict_records_carry_witnesses() {
        // 1289, 1291: difference 2 has no odd prime divisor; take a window whose
        // differences do: 1327 -> 1361 (gap 34 = 2 * 17)
        let r = rec("strict:++", 218, &[1327, 1361]);
        assert_eq!(r.witnesses.as_ref().unwrap().get("0,1"), Some(&17));
        let line = r.to_json_line();
        assert!(line.contains("\"witnesses\":{\"0,1\":17}"));
        let tampered = line.replace(":17}", ":19}");
        assert!(MatchRecord::from_json_line(&tampered).is_err());
        assert_eq!(r.to_csv_row().split(',').next_back(), Some("0-1:17"));
    }

    #[test]
    fn formats() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert!("xml".parse::<OutputFormat>().is_err());
        assert_eq!(write_bfile_line(1, 8560), "1 8560");
    }
}
