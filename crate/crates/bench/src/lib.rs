//! Fixtures shared by the benchmarks in `benches/`.

use motionkit_core::representation::RepresentationConfig;
use motionkit_core::synth::{generate_cohort, CohortConfig};
use motionkit_core::{MotionRecording, MotionVector, MovementKind};

/// A small cohort restricted to one movement.
pub fn cohort(subjects: usize, movement: MovementKind, seed: u64) -> Vec<MotionRecording> {
    let cfg = CohortConfig {
        movements: vec![movement],
        ..CohortConfig::with_subjects(subjects)
    };
    generate_cohort(&cfg, seed).expect("default profiles are valid")
}

pub fn vectors(recordings: &[MotionRecording], movement: MovementKind, seed: u64) -> Vec<MotionVector> {
    motionkit_core::pipeline::movement_vectors(recordings, movement, &RepresentationConfig::default(), seed)
        .expect("synthetic recordings encode")
}
