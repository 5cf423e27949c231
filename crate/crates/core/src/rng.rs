//! Seeded random streams.
//!
//! Every run owns one ChaCha8 key derived from its seed. Each consumer gets its
//! own ChaCha stream id, and each slot starts at a fixed word offset inside that
//! stream, so the draws for slot `k` depend only on `(seed, stream, k)`. A run
//! resumed from slot `k` therefore sees exactly the randomness of the original.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved for a single slot inside one stream.
const SLOT_WORDS_LOG2: u32 = 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Workload = 1,
    Agent = 2,
    Baseline = 3,
}

/// Generator positioned at the start of `slot` in the given stream.
pub fn slot_rng(seed: u64, stream: Stream, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng.set_word_pos(u128::from(slot) << SLOT_WORDS_LOG2);
    rng
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
