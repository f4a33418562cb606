//! Deterministic sub-seed derivation.
//!
//! Every random draw in the pipeline is traceable to a single top-level seed.
//! Components never share an RNG; each derives its own sub-seed from
//! `(seed, tag)` where the tag names the consumer, e.g. `"netmodel.place"` or
//! `"qaoa.opt.cluster3"`. The derivation is FNV-1a over the tag bytes mixed
//! into the seed, finalized with the SplitMix64 scrambler.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Derive the sub-seed for `tag` from a top-level `seed`.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in tag.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(seed ^ h)
}

/// Seeded RNG for `tag`, ready to draw from.
pub fn rng_for(seed: u64, tag: &str) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, tag))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
