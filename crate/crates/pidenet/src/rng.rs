//! Deterministic, splittable random streams.
//!
//! Every stochastic routine in this crate draws from a ChaCha12 generator
//! keyed by `(seed, domain, index)`. Streams are assigned by logical task
//! index (path number, realization number, randomness source), never by
//! worker thread, so results are independent of the thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Randomness source separators within one realization.
pub mod domain {
    pub const BROWNIAN: u64 = 1;
    pub const JUMPS: u64 = 2;
    pub const COMPENSATOR: u64 = 3;
    pub const MC_PATH: u64 = 4;
    pub const PROBE: u64 = 5;
    pub const REALIZATION: u64 = 6;
    pub const MEASURE: u64 = 7;
    pub const SELECTION: u64 = 8;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for logical stream `(seed, domain, index)`.
///
/// The 256-bit ChaCha key is filled from a splitmix64 chain over the three
/// coordinates, so distinct coordinates give unrelated keys.
pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha12Rng {
    let mut state = seed ^ domain.rotate_left(24) ^ index.rotate_left(48);
    // decorrelate near-identical coordinates before filling the key
    splitmix64(&mut state);
    state ^= domain.wrapping_mul(0xa076_1d64_78bd_642f);
    splitmix64(&mut state);
    state ^= index.wrapping_mul(0xe703_7ed1_a0b4_28db);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}
