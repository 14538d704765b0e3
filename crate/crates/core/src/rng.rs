//! Seeded, splittable random streams.
//!
//! All stochastic work in this crate draws from ChaCha8 streams derived from
//! a user-supplied `u64` seed. Sub-streams are split by mixing integer tags
//! (feature index, repeat index, permutation index, ...) into the seed with
//! splitmix64, so the stream consumed by one unit of work never depends on
//! how much randomness other units consumed. Parallel and sequential
//! execution therefore produce identical artifacts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer. Standard constants.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and an ordered list of stream tags.
///
/// `split(s, &[a, b])` differs from `split(s, &[b, a])` and from
/// `split(s, &[a])`: both the tag values and their order matter.
pub fn split(seed: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &tag in tags {
        state = splitmix64(state ^ splitmix64(tag.wrapping_add(0xA5A5_A5A5_A5A5_A5A5)));
    }
    state
}

/// ChaCha8 stream for a raw seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// ChaCha8 stream for `split(seed, tags)`.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    rng_from(split(seed, tags))
}
