//! Deterministic random streams.
//!
//! Every Monte Carlo work unit draws from its own ChaCha8 stream keyed by
//! `(run seed, purpose, index)`, so results never depend on scheduling or on
//! how many workers run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Independent families of streams drawn from the same run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Path = 1,
    RuinPath = 2,
    UnitInterval = 3,
    InfimumTail = 4,
    Increments = 5,
    Synthetic = 6,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> Stream {
    // splitmix64 finaliser over (seed, purpose) picks the key; the index is the
    // ChaCha stream id.
    let mut k = seed ^ (purpose as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    k = (k ^ (k >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    k = (k ^ (k >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    k ^= k >> 31;
    let mut rng = ChaCha8Rng::seed_from_u64(k);
    rng.set_stream(index);
    rng
}

/// Run `f` on a dedicated pool with `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
