//! Deterministic random streams.
//!
//! ChaCha is a counter-based generator: a `(seed, stream)` pair names an
//! independent keystream and every word in it is addressable by position.
//! Keying streams by node id (or trial index, or epoch) makes every draw
//! independent of iteration order and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream namespaces, so that e.g. node 3's signature never shares a
/// keystream with trial 3 of a probe run under the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Signature = 1,
    Split = 2,
    Generator = 3,
    Probe = 4,
    Init = 5,
    Epoch = 6,
    Pairs = 7,
}

/// Returns the generator for `index` within `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let key = mix(seed ^ mix(domain as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
