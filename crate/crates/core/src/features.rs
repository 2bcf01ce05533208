//! Per-frame clinical feature vector.
//!
//! Sixteen values per frame, in this order:
//!
//! | index | feature | unit |
//! |-------|---------|------|
//! | 0 | distance SpineBase to Head | m |
//! | 1 | angle of SpineBase→Neck against world vertical | rad |
//! | 2 | sagittal body lean of SpineBase→SpineMid, `atan2(z, y)` | rad |
//! | 3..6 | centre of mass, mean of SpineMid, HipLeft, HipRight | m |
//! | 6..16 | `(x, y)` of each torso joint, z dropped | m |
//!
//! The inter-vector angle is `arccos` of the clamped cosine ratio, which
//! keeps it in `[0, π]`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::skeleton::{JointId, MotionRecording, SkeletonFrame, Vec3};

pub const FEATURE_COUNT: usize = 16;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "euclid_spine_head",
    "euler_spine_neck",
    "body_lean_ap",
    "com_x",
    "com_y",
    "com_z",
    "spine_base_x",
    "spine_base_y",
    "spine_mid_x",
    "spine_mid_y",
    "shoulder_left_x",
    "shoulder_left_y",
    "shoulder_right_x",
    "shoulder_right_y",
    "spine_shoulder_x",
    "spine_shoulder_y",
];

/// Reference direction for the trunk inclination angle.
pub const VERTICAL: Vec3 = Vec3::new(0.0, 1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseFeatureVector {
    pub euclid_spine_head: f64,
    pub euler_spine_neck: f64,
    pub body_lean_ap: f64,
    pub com: Vec3,
    pub torso_ml: [f64; 10],
}

impl PoseFeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        out[0] = self.euclid_spine_head;
        out[1] = self.euler_spine_neck;
        out[2] = self.body_lean_ap;
        out[3] = self.com.x;
        out[4] = self.com.y;
        out[5] = self.com.z;
        out[6..].copy_from_slice(&self.torso_ml);
        out
    }
}

pub fn euclidean_distance(a: Vec3, b: Vec3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Angle between two non-zero vectors, in `[0, π]`.
pub fn euler_angle(s: Vec3, q: Vec3) -> Result<f64> {
    let ns = s.norm();
    let nq = q.norm();
    if ns == 0.0 || nq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cos = (s.dot(q) / (ns * nq)).clamp(-1.0, 1.0);
    Ok(cos.acos())
}

/// Signed sagittal-plane inclination of the lower spine; positive is a
/// forward (+z) lean, zero is upright.
pub fn body_lean_angle(frame: &SkeletonFrame) -> Result<f64> {
    let v = frame.joint(JointId::SpineMid) - frame.joint(JointId::SpineBase);
    if v == Vec3::ZERO {
        return Err(Error::ZeroVector);
    }
    Ok(v.z.atan2(v.y))
}

pub fn center_of_mass(frame: &SkeletonFrame) -> Vec3 {
    let sum = frame.joint(JointId::SpineMid)
        + frame.joint(JointId::HipLeft)
        + frame.joint(JointId::HipRight);
    sum / 3.0
}

pub fn torso_ml_positions(frame: &SkeletonFrame) -> [f64; 10] {
    let mut out = [0.0; 10];
    for (pair, joint) in out.chunks_exact_mut(2).zip(JointId::TORSO) {
        let p = frame.joint(joint);
        pair[0] = p.x;
        pair[1] = p.y;
    }
    out
}

pub fn encode_frame(frame: &SkeletonFrame) -> Result<PoseFeatureVector> {
    let base = frame.joint(JointId::SpineBase);
    Ok(PoseFeatureVector {
        euclid_spine_head: euclidean_distance(base, frame.joint(JointId::Head)),
        euler_spine_neck: euler_angle(frame.joint(JointId::Neck) - base, VERTICAL)?,
        body_lean_ap: body_lean_angle(frame)?,
        com: center_of_mass(frame),
        torso_ml: torso_ml_positions(frame),
    })
}

/// Encodes every frame of an (already normalized) recording, in order.
pub fn encode_recording(rec: &MotionRecording) -> Result<Vec<PoseFeatureVector>> {
    if rec.is_empty() {
        return Err(Error::EmptyRecording);
    }
    rec.frames().iter().map(encode_frame).collect()
}

/// Writes a header row of feature names followed by one row per frame.
pub fn write_features_csv<W: Write>(out: W, features: &[PoseFeatureVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Data(format!("writing features: {e}"));
    let mut header = vec!["frame"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header).map_err(io_err)?;
    for (i, f) in features.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(f.to_array().iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("writing features: {e}")))?;
    Ok(())
}
