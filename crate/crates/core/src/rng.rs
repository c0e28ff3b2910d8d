use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// All randomized code paths draw from ChaCha streams keyed by a user seed,
/// so runs are bit-reproducible across platforms and thread counts.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from (seed, index), e.g. one per Monte Carlo
/// trial. splitmix64 finalizer; decorrelates consecutive indices.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derived_rng(seed: u64, index: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(seed, index))
}
