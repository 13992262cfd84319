//! Deterministic seeding.
//!
//! All randomness in the crate uses [`ChaCha8Rng`] seeded through
//! [`rng_from`]. Child seeds are derived from a parent seed and a path of
//! string labels (stage, dataset, fold, member, ...) with FNV-1a followed by
//! a SplitMix64 finalizer, so adding a new label never perturbs the seeds of
//! existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over `bytes`, starting from a state perturbed by `seed`.
pub fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ splitmix64(seed);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derives a child seed from `parent` and a label path.
pub fn derive_seed<S: AsRef<str>>(parent: u64, labels: &[S]) -> u64 {
    labels.iter().fold(parent, |acc, label| {
        // 0xff never occurs in UTF-8, so it separates labels unambiguously.
        let mut bytes = label.as_ref().as_bytes().to_vec();
        bytes.push(0xff);
        splitmix64(fnv1a(acc, &bytes))
    })
}

pub fn rng_from(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
