//! Seed derivation for all Monte Carlo work.
//!
//! Every random stream is a ChaCha8 generator keyed by the user seed and a
//! stream tag, with the ChaCha stream id set from the trial coordinates:
//!
//! ```text
//! key    = splitmix64 expansion of (seed, fnv1a64(tag))
//! stream = fold of splitmix64 over the index tuple
//! ```
//!
//! ChaCha is counter based, so streams for different trials are independent
//! and can be generated in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in outputs so results can be replayed.
pub const RNG_ALGORITHM: &str = "chacha8/splitmix64-key/v1";

pub type Rng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Generator for stream `tag` at coordinates `indices` under `seed`.
pub fn derive_rng(seed: u64, tag: &str, indices: &[u64]) -> Rng {
    let mut state = seed ^ fnv1a64(tag.as_bytes()).rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut stream_state = 0x005E_ED0F_5EED_u64;
    let mut stream = 0;
    for &i in indices {
        stream_state ^= i;
        stream = splitmix64(&mut stream_state);
    }
    rng.set_stream(stream);
    rng
}
