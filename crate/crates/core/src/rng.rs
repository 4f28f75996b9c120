//! Counter-based random streams.
//!
//! Every random decision is addressed by `(seed, domain, a, b)`, where `a`
//! and `b` are usually a record and a column (or a partition, replication,
//! ...). The address selects a ChaCha8 stream id and a word offset, so any
//! decision can be regenerated independently of evaluation order and of the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per `(domain, a, b)` address before streams would overlap.
const WORDS_PER_ADDRESS_LOG2: u32 = 20;
const MAX_B: u64 = 1 << (68 - WORDS_PER_ADDRESS_LOG2);
const MAX_A: u64 = 1 << 56;

/// Disjoint substreams. The discriminant occupies the top byte of the
/// ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    Coin = 1,
    Donor = 2,
    Pool = 3,
    PairRanks = 4,
    Partition = 5,
    Split = 6,
    Synthetic = 7,
    Replication = 8,
}

#[derive(Clone, Debug)]
pub struct Streams {
    base: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn stream(&self, domain: Domain, a: u64, b: u64) -> ChaCha8Rng {
        assert!(a < MAX_A && b < MAX_B, "stream address out of range");
        let mut rng = self.base.clone();
        rng.set_stream(((domain as u64) << 56) | a);
        rng.set_word_pos((b as u128) << WORDS_PER_ADDRESS_LOG2);
        rng
    }
}

/// Derive a child seed, e.g. for one replication of an experiment.
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    use rand::RngCore;
    Streams::new(seed).stream(domain, index, 0).next_u64()
}
