//! Prime generation and indexing: segmented sieve, deterministic 64-bit
//! primality, the `n ↦ p_n` table and consecutive-prime windows.

mod indexer;
mod miller_rabin;
mod sieve;
mod window;

pub use indexer::{Checkpoint, PrimeIndexer, DEFAULT_BOUND, DEFAULT_CHECKPOINT_STRIDE};
pub use miller_rabin::{is_prime_64, is_probable_prime_big, BIG_MR_ROUNDS};
pub use sieve::{
    sieve_range, simple_sieve, PrimeSegment, PrimeStream, Sieve, DEFAULT_RANGE_BUDGET,
    DEFAULT_SEGMENT_BITS,
};
pub use window::{PrimeWindow, WindowIter};
