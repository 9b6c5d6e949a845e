//! Synthetic scenes, the error-vs-distance experiment and the oracles built
//! on ground truth.
//!
//! All lengths are in marker diameters (`D = 1`) unless a function says
//! otherwise.

pub mod experiment;
pub mod metrics;
pub mod observations;
pub mod prop2;
pub mod scene;

pub use experiment::{run_experiment, run_trial, ExperimentConfig, TrialRecord};
pub use metrics::{metric_normal, metric_position, metric_reproj};
pub use scene::{make_scene, random_scene, side_scene, GroundTruthScene};

/// Stateless 64-bit mixer used to derive per-trial seeds from structured keys.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        h ^= p
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(h << 6)
            .wrapping_add(h >> 2);
        h = splitmix(h);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
