//! Stable seed derivation.
//!
//! Every Monte-Carlo trial, solver start and STFT bin gets its own RNG whose
//! seed is a pure function of a master seed and a list of integer labels, so
//! results never depend on how work is scheduled across threads.
//!
//! The mixer is the SplitMix64 finalizer:
//!
//! ```text
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          z ^ (z >> 31)
//! derive(master, [p1, .., pn]):
//!          h = master
//!          for p: h = mix(h ^ mix(p + 0x9E3779B97F4A7C15))
//! ```
//!
//! All arithmetic is wrapping on `u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Concrete RNG used throughout the crate.
pub type PhunRng = ChaCha8Rng;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(master, |h, &p| {
        mix64(h ^ mix64(p.wrapping_add(GOLDEN_GAMMA)))
    })
}

/// FNV-1a, used to turn labels (solver names) into seed parts.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn rng_from_seed(seed: u64) -> PhunRng {
    ChaCha8Rng::seed_from_u64(seed)
}
