use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Predicate;
use crate::error::{Error, Result};

const CHECKPOINT_VERSION: u32 = 1;

/// Resumable search state, stored as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCheckpoint {
    pub version: u32,
    pub predicate: String,
    /// First 16 hex digits of `sha256("<predicate>|m=<m>")`.
    pub predicate_hash: String,
    pub m: usize,
    pub last_n_scanned: u64,
    pub matches_found: u64,
    pub last_match: Option<u64>,
}

impl SearchCheckpoint {
    pub fn new(predicate: &Predicate, m: usize) -> Self {
        SearchCheckpoint {
            version: CHECKPOINT_VERSION,
            predicate: predicate.to_string(),
            predicate_hash: Self::hash_for(predicate, m),
            m,
            last_n_scanned: 0,
            matches_found: 0,
            last_match: None,
        }
    }

    pub fn hash_for(predicate: &Predicate, m: usize) -> String {
        let digest = Sha256::digest(format!("{predicate}|m={m}").as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Fails unless this checkpoint was written for the same search.
    pub fn check_compatible(&self, predicate: &Predicate, m: usize) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "checkpoint version {} is not supported",
                self.version
            )));
        }
        if self.m != m || self.predicate_hash != Self::hash_for(predicate, m) {
            return Err(Error::invalid(format!(
                "checkpoint was written for {} with m = {}, not {predicate} with m = {m}",
                self.predicate, self.m
            )));
        }
        Ok(())
    }

    /// First starting index not yet covered.
    pub fn resume_from(&self) -> u64 {
        self.last_n_scanned + 1
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Writes through a temporary file so an interrupted write never leaves
    /// a truncated checkpoint behind.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_compatibility() {
        let pred: Predicate = "++".parse().unwrap();
        let mut cp = SearchCheckpoint::new(&pred, 5);
        cp.last_n_scanned = 1234;
        cp.matches_found = 2;
        cp.last_match = Some(1000);
        assert_eq!(cp.predicate_hash.len(), 16);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        cp.save(&path).unwrap();
        let back = SearchCheckpoint::load(&path).unwrap();
        assert_eq!(back, cp);
        assert_eq!(back.resume_from(), 1235);
        back.check_compatible(&pred, 5).unwrap();
        assert!(back.check_compatible(&pred, 4).is_err());
        assert!(back.check_compatible(&"--".parse().unwrap(), 5).is_err());
    }
}
