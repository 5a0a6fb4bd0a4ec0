//! Seeded random streams.
//!
//! Stream-splitting rule: every random computation is driven by a master
//! seed. Independent units of work (a resampling realization, a Monte Carlo
//! block, a replication) are numbered `0, 1, 2, ...` and unit `i` reads from
//! ChaCha8 seeded with the master seed and switched to stream `i`. Nested
//! work (realizations inside a replication) first derives a child seed with
//! [`derive_seed`] and then applies the same rule. Results therefore never
//! depend on the order, or the thread, in which units are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for unit `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for a path of indices below `seed` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |acc, &i| {
        splitmix(acc ^ splitmix(i.wrapping_add(0x632b_e59b_d9b4_e019)))
    })
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
