//! Seed streams.
//!
//! Every random draw in the crate comes from ChaCha20 (the `rand_chacha`
//! 20-round variant) addressed by a master seed plus a path of integers, e.g.
//! `[SHOT, depth, walker, eval]`. The derivation is:
//!
//! - key: the 32-byte little-endian encoding of `[seed, 0, 0, 0]` as four `u64`,
//! - stream id: `fold(path)` where `fold` starts at 0 and for each component
//!   `c` computes `s = splitmix64(s ^ splitmix64(c))`,
//! - word position 0.
//!
//! Nothing else is consumed from the host, so the streams are reproducible from
//! the manifest alone in any language with a ChaCha20 implementation.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const GENERATE: u64 = 1;
pub const SAMPLE: u64 = 2;
pub const WALKER: u64 = 3;
pub const SHOT: u64 = 4;
pub const REPETITION: u64 = 5;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fold(path: &[u64]) -> u64 {
    path.iter().fold(0u64, |s, &c| splitmix64(s ^ splitmix64(c)))
}

/// ChaCha20 stream for `seed` at `path`.
pub fn stream(seed: u64, path: &[u64]) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(fold(path));
    rng.set_word_pos(0);
    rng
}

/// A child seed, for APIs that take a plain `u64`.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    use rand::RngCore;
    stream(seed, path).next_u64()
}
