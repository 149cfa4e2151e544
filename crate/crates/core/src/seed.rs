//! Deterministic seed derivation.
//!
//! Every random stream in the toolkit (one per tree, per test case, per
//! simulation block) is keyed by a master seed plus a stream label and an
//! index, so results never depend on scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels keep derived seeds for different purposes apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Tree = 1,
    TestCase = 2,
    Simulation = 3,
    Pilot = 4,
    Split = 5,
    GlobalForest = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for item `index` of `stream` under `master`.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(master ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(a ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
