//! Skeleton-based age-group classification: joint streams, per-frame pose
//! features, k-means motion vectors, three binary classifiers, grouped
//! cross-validation and a synthetic cohort generator.

pub mod classifiers;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod pipeline;
pub mod representation;
pub mod seed;
pub mod skeleton;
pub mod synth;

pub use classifiers::{ClassifierConfig, ClassifierKind, Prediction, TrainedModel, TrainingSet};
pub use error::{Error, ErrorCategory, Result};
pub use evaluation::{ConfusionMatrix, EvaluationReport, Metrics};
pub use features::{PoseFeatureVector, FEATURE_COUNT};
pub use pipeline::{run_pipeline, PipelineConfig};
pub use representation::{MotionVector, RepresentationConfig};
pub use skeleton::{AgeGroup, JointId, MotionRecording, MovementKind, SkeletonFrame, Vec3};
pub use synth::{SwayProfile, default_profiles};
