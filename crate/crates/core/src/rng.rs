//! Named, reproducible random substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the stream name; stable across platforms and releases.
fn name_hash(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Generator for the substream `name` of the experiment seeded with `seed`.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(name_hash(name));
    rng
}

/// Generator for sample `index` within a named substream.
pub fn sample_stream(seed: u64, name: &str, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(name_hash(name));
    rng
}
