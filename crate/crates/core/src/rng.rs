//! Counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha stream addressed by
//! `(seed, domain, index)`. Draw `i` of a batch always sees the same stream no
//! matter which thread runs it or in which order, so parallel runs reproduce
//! sequential ones bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator handed to simulators and samplers.
pub type Stream = ChaCha8Rng;

/// Stream domains. Distinct domains never share a ChaCha stream id.
pub mod domain {
    pub const TRAINING: u16 = 1;
    pub const FRESH: u16 = 2;
    pub const OBSERVED: u16 = 3;
    pub const REPLICATE: u16 = 4;
    pub const AUXILIARY: u16 = 5;
}

const INDEX_BITS: u32 = 48;

/// Returns the stream for item `index` of `domain` under `seed`.
///
/// Panics if `index` does not fit in 48 bits.
pub fn substream(seed: u64, domain: u16, index: u64) -> Stream {
    assert!(index < (1u64 << INDEX_BITS), "stream index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << INDEX_BITS) | index);
    rng
}

/// Derives a child seed, used when one experiment runs several independent
/// replications each needing a full seed of its own.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    substream(seed, domain::REPLICATE, index).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |mut r: Stream| (0..4).map(|_| r.next_u64()).collect::<Vec<_>>();
        let a = draw(substream(7, 1, 3));
        let b = draw(substream(7, 1, 3));
        assert_eq!(a, b);
        let mut other = substream(7, 1, 4);
        assert_ne!(a[0], other.next_u64());
        let mut other_domain = substream(7, 2, 3);
        assert_ne!(a[0], other_domain.next_u64());
    }
}
