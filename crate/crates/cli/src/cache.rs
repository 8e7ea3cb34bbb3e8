use std::path::PathBuf;

use primewin::primes::PrimeIndexer;

/// Directory holding the persisted prime-index table.
pub const CACHE_DIR_VAR: &str = "PRIMEWIN_CACHE_DIR";
const INDEX_FILE: &str = "prime-index.txt";

fn index_path() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_VAR)
        .filter(|v| !v.is_empty())
        .map(|dir| PathBuf::from(dir).join(INDEX_FILE))
}

/// An indexer seeded from the cache directory when one is configured.
pub fn open_indexer(bound: u64) -> PrimeIndexer {
    match index_path() {
        Some(path) => PrimeIndexer::open_cached(&path, bound),
        None => PrimeIndexer::new(bound),
    }
}

/// Persists the index table; failures only cost a warning.
pub fn store_indexer(indexer: &PrimeIndexer) {
    if let Some(path) = index_path() {
        if let Err(e) = indexer.save(&path) {
            eprintln!(
                "warning: could not write prime index cache {}: {e}",
                path.display()
            );
        }
    }
}
