//! Counter-based seeding: every random draw in a run comes from a stream
//! keyed by `(master seed, domain, a, b)`, so results never depend on the
//! order in which workers pick up genomes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains. Distinct domains never share a stream.
pub mod domain {
    pub const INIT: u64 = 1;
    pub const MUTATION: u64 = 2;
    pub const INPUT_NOISE: u64 = 3;
    pub const WEIGHT_NOISE: u64 = 4;
    pub const CELL: u64 = 5;
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a key tuple down to one 64-bit seed.
pub fn derive_seed(master: u64, domain: u64, a: u64, b: u64) -> u64 {
    let mut h = mix64(master);
    h = mix64(h ^ domain);
    h = mix64(h ^ a);
    mix64(h ^ b)
}

pub fn stream(master: u64, domain: u64, a: u64, b: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, a, b))
}
