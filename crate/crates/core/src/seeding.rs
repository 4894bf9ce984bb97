//! Deterministic per-frame random streams.
//!
//! Every stochastic step derives its generator from (global seed, frame
//! timestamp, domain tag), so frames can be produced in any order — or in
//! parallel — with identical results, and independent consumers (noise
//! synthesis, pose jitter, label perturbation) never share a stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream domains, kept distinct so consumers of the same frame draw
/// independent randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    RadarNoise = 1,
    PoseJitter = 2,
    LabelPerturbation = 3,
    SceneSynthesis = 4,
}

/// Builds the generator for one (seed, timestamp, domain) triple.
pub fn frame_rng(global_seed: u64, timestamp: f64, kind: StreamKind) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&global_seed.to_le_bytes());
    key[8..16].copy_from_slice(&timestamp.to_bits().to_le_bytes());
    key[16..24].copy_from_slice(&(kind as u64).to_le_bytes());
    ChaCha20Rng::from_seed(key)
}
