//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, purpose, replication, chunk)`: the ChaCha key comes from
//! `(seed, purpose)` and the 64-bit stream id packs `replication` and the chunk index. Every
//! chunk of [`CHUNK`] samples gets a fresh generator, so any split of the work across threads
//! reproduces the same draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Samples per generator.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Main,
    Pilot,
    Reference,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Main => 0x6d61_696e,
            Purpose::Pilot => 0x7069_6c6f,
            Purpose::Reference => 0x7265_6665,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64, purpose: Purpose) -> [u8; 32] {
    let mut state = seed ^ purpose.tag().rotate_left(32);
    let mut out = [0u8; 32];
    for block in out.chunks_exact_mut(8) {
        block.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Generator for chunk `chunk` of replication `replication`.
pub fn chunk_rng(seed: u64, purpose: Purpose, replication: usize, chunk: usize) -> ChaCha8Rng {
    assert!(replication < 1 << 32 && chunk < 1 << 32, "stream index out of range");
    let mut rng = ChaCha8Rng::from_seed(key(seed, purpose));
    rng.set_stream(((replication as u64) << 32) | chunk as u64);
    rng
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Number of chunks covering `n` samples.
pub fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK)
}
