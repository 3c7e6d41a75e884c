//! Fixtures shared by the benchmarks.

use gaitscope::synth::{generate, WalkerSpec};
use gaitscope::{write_bvh, MotionClip};

/// A noisy straight walk of the given length at 60 frames per second.
pub fn walker_clip(duration_s: f64) -> MotionClip {
    generate(&WalkerSpec {
        duration_s,
        noise: 0.003,
        sway: 0.01,
        seed: 42,
        ..Default::default()
    })
    .expect("benchmark spec is valid")
    .clip
}

/// The same walk serialized as BVH text.
pub fn walker_bvh(duration_s: f64) -> String {
    write_bvh(&walker_clip(duration_s))
}
