//! Seed derivation.
//!
//! Every run owns one 64-bit seed. Inside a run each agent draws from its
//! own ChaCha stream keyed by that seed, so the values an agent sees never
//! depend on how many draws other agents made or in which order agents are
//! visited. The engine and the metrics evaluator have dedicated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used by the engine itself (initial history).
pub const ENGINE_STREAM: u64 = 0;
/// Stream used when sampling task times for the QoE metric.
pub const METRICS_STREAM: u64 = u64::MAX;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one run of an experiment grid, hashed from the root seed, the
/// policy name, the memory size (0 for memoryless policies) and the run index.
pub fn derive_run_seed(root_seed: u64, policy_name: &str, memory: u32, run_index: u64) -> u64 {
    let mut h = mix64(root_seed);
    for &b in policy_name.as_bytes() {
        h = mix64(h ^ u64::from(b));
    }
    // Length terminator keeps "ab"+s from aliasing "a"+("b" folded into s).
    h = mix64(h ^ ((policy_name.len() as u64) << 8));
    h = mix64(h ^ u64::from(memory));
    mix64(h ^ run_index)
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for agent `index` (0-based) of a run seeded with `seed`.
pub fn agent_rng(seed: u64, index: usize) -> ChaCha8Rng {
    stream_rng(seed, index as u64 + 1)
}
