//! Deterministic RNG derivation.
//!
//! All randomness in the pipeline funnels through one master seed, forked per
//! stage by a stable string label so that independent stages draw independent
//! streams and re-running any stage reproduces its output bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a stage-specific seed from the master seed and a stable label.
pub fn stage_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// RNG for a named pipeline stage.
pub fn stage_rng(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stage_seed(master, label))
}
