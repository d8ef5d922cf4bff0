//! Deterministic derivation of independent random streams.
//!
//! All stochastic routines in this crate key their generators off a master
//! seed plus a handful of context words (stage tag, method id, run index, …).
//! Derivation is a SplitMix64 chain, so any two distinct contexts yield
//! uncorrelated, platform-independent streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 scramble step.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with context words into a single derived seed.
pub fn derive_seed(master: u64, context: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &word in context {
        state ^= word.wrapping_mul(0x2545_f491_4f6c_dd1d);
        out ^= splitmix64(&mut state);
    }
    out
}

/// Build a seeded generator for the given context.
pub fn rng_from(master: u64, context: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, context))
}

/// Stable 64-bit FNV-1a hash of a name, for use as a context word.
pub fn name_tag(name: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in name.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
