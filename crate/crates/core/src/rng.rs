//! Deterministic random-number streams.
//!
//! ChaCha8 is counter-based, so independent streams come for free: the user
//! seed keys the generator and the 64-bit stream id is split as
//! `domain << 32 | context_index`. Every context gets its own stream per
//! domain (noise draws vs. count draws), which makes per-context sampling
//! order-independent — parallel and sequential execution see identical
//! draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domain for vector-jitter noise draws.
pub const DOMAIN_JITTER: u64 = 1;
/// Stream domain for photon-count draws.
pub const DOMAIN_COUNTS: u64 = 2;

pub fn context_stream(seed: u64, domain: u64, context_index: usize) -> ChaCha8Rng {
    debug_assert!(context_index < (1 << 32));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 32) | context_index as u64);
    rng
}
