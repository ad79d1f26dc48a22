//! Counter-based random substreams.
//!
//! Every atom and every trial draws from its own ChaCha stream, selected by
//! `(seed, domain, index)`. Results therefore do not depend on how work is
//! split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Substream domain for atom sampling.
pub(crate) const DOMAIN_ATOMS: u64 = 0x6174_6f6d_7300_0000;
/// Substream domain for protocol trials.
pub(crate) const DOMAIN_TRIALS: u64 = 0x7472_6961_6c73_0000;

/// Independent generator for item `index` of `domain` under `seed`.
pub fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(index);
    rng
}

/// Mixes a sub-run label into a seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed.wrapping_add(label.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
