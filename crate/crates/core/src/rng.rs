//! Deterministic random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream, identified by a
//! `(seed, domain, index)` triple. ChaCha is counter-based, so distinct
//! stream ids give independent sequences and no state is shared between
//! threads: results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Namespaces for stream ids so that, e.g., chain 0 and cohort 0 never
/// share a stream under the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    Chain = 1,
    Cohort = 2,
    MomentReplicates = 3,
    GammaRatio = 4,
    Replication = 5,
}

pub fn stream(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 48) ^ index);
    rng
}

/// Derive a child seed (for nested experiments) from a parent seed and index.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // SplitMix64 finalizer.
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
