//! Seeded random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! `(seed, stream)` pair, so results never depend on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named purposes for streams derived from one global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    Shocks,
    Thresholds,
    TieBreaks,
    Adversarial,
}

impl Substream {
    fn tag(self) -> u64 {
        match self {
            Substream::Shocks => 0x5348_4f43_4b53_0001,
            Substream::Thresholds => 0x5448_5245_5348_0002,
            Substream::TieBreaks => 0x5449_4542_524b_0003,
            Substream::Adversarial => 0x4144_5645_5253_0004,
        }
    }
}

/// Derives the seed for a named component from a global seed.
pub fn derive_seed(global: u64, purpose: Substream) -> u64 {
    splitmix64(global ^ purpose.tag())
}

/// Generator for work item `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes two words into one seed; used to key nested loops.
pub fn mix(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
