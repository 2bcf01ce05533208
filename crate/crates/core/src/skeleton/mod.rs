//! Skeleton and recording types, joint vocabulary and first-frame pose
//! normalization.
//!
//! Coordinates follow Kinect v2 camera space in meters: `x` is the
//! medio-lateral (ML) axis, `y` is vertical and `z` is the
//! anterior-posterior (AP) axis, oriented so that `+z` is anterior
//! (a forward lean increases `z`).

pub mod io;

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const JOINT_COUNT: usize = 25;

/// The 25 Kinect v2 joints. Declaration order is the canonical column order
/// of every on-disk format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JointId {
    SpineBase,
    SpineMid,
    Neck,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
    SpineShoulder,
    HandTipLeft,
    ThumbLeft,
    HandTipRight,
    ThumbRight,
}

impl JointId {
    pub const ALL: [JointId; JOINT_COUNT] = [
        JointId::SpineBase,
        JointId::SpineMid,
        JointId::Neck,
        JointId::Head,
        JointId::ShoulderLeft,
        JointId::ElbowLeft,
        JointId::WristLeft,
        JointId::HandLeft,
        JointId::ShoulderRight,
        JointId::ElbowRight,
        JointId::WristRight,
        JointId::HandRight,
        JointId::HipLeft,
        JointId::KneeLeft,
        JointId::AnkleLeft,
        JointId::FootLeft,
        JointId::HipRight,
        JointId::KneeRight,
        JointId::AnkleRight,
        JointId::FootRight,
        JointId::SpineShoulder,
        JointId::HandTipLeft,
        JointId::ThumbLeft,
        JointId::HandTipRight,
        JointId::ThumbRight,
    ];

    /// Trunk joints whose ML-plane positions enter the feature vector,
    /// in output order.
    pub const TORSO: [JointId; 5] = [
        JointId::SpineBase,
        JointId::SpineMid,
        JointId::ShoulderLeft,
        JointId::ShoulderRight,
        JointId::SpineShoulder,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            JointId::SpineBase => "SpineBase",
            JointId::SpineMid => "SpineMid",
            JointId::Neck => "Neck",
            JointId::Head => "Head",
            JointId::ShoulderLeft => "ShoulderLeft",
            JointId::ElbowLeft => "ElbowLeft",
            JointId::WristLeft => "WristLeft",
            JointId::HandLeft => "HandLeft",
            JointId::ShoulderRight => "ShoulderRight",
            JointId::ElbowRight => "ElbowRight",
            JointId::WristRight => "WristRight",
            JointId::HandRight => "HandRight",
            JointId::HipLeft => "HipLeft",
            JointId::KneeLeft => "KneeLeft",
            JointId::AnkleLeft => "AnkleLeft",
            JointId::FootLeft => "FootLeft",
            JointId::HipRight => "HipRight",
            JointId::KneeRight => "KneeRight",
            JointId::AnkleRight => "AnkleRight",
            JointId::FootRight => "FootRight",
            JointId::SpineShoulder => "SpineShoulder",
            JointId::HandTipLeft => "HandTipLeft",
            JointId::ThumbLeft => "ThumbLeft",
            JointId::HandTipRight => "HandTipRight",
            JointId::ThumbRight => "ThumbRight",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// A frame as read from disk, before validation. Joints may be absent
/// (untracked) or carry non-finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub frame_index: u64,
    pub joints: [Option<Vec3>; JOINT_COUNT],
}

impl RawFrame {
    pub fn new(frame_index: u64) -> Self {
        RawFrame {
            frame_index,
            joints: [None; JOINT_COUNT],
        }
    }

    pub fn set(&mut self, joint: JointId, p: Vec3) {
        self.joints[joint.index()] = Some(p);
    }
}

impl From<&SkeletonFrame> for RawFrame {
    fn from(f: &SkeletonFrame) -> Self {
        RawFrame {
            frame_index: f.frame_index,
            joints: f.joints.map(Some),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameViolation {
    MissingJoint(JointId),
    NonFinite(JointId),
}

/// Lists every problem that keeps `frame` from being a valid skeleton.
pub fn validate_frame(frame: &RawFrame) -> Vec<FrameViolation> {
    JointId::ALL
        .iter()
        .filter_map(|&j| match frame.joints[j.index()] {
            None => Some(FrameViolation::MissingJoint(j)),
            Some(p) if !p.is_finite() => Some(FrameViolation::NonFinite(j)),
            Some(_) => None,
        })
        .collect()
}

/// A complete pose: all 25 joints present with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFrame {
    frame_index: u64,
    joints: [Vec3; JOINT_COUNT],
}

impl SkeletonFrame {
    pub fn new(frame_index: u64, joints: [Vec3; JOINT_COUNT]) -> Result<Self, Vec<FrameViolation>> {
        let raw = RawFrame {
            frame_index,
            joints: joints.map(Some),
        };
        SkeletonFrame::try_from(raw)
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    #[inline]
    pub fn joint(&self, j: JointId) -> Vec3 {
        self.joints[j.index()]
    }

    pub fn joints(&self) -> &[Vec3; JOINT_COUNT] {
        &self.joints
    }

    /// Same frame with every joint shifted by `offset`.
    pub fn translated(&self, offset: Vec3) -> SkeletonFrame {
        SkeletonFrame {
            frame_index: self.frame_index,
            joints: self.joints.map(|p| p + offset),
        }
    }

    fn minus(&self, origin: Vec3) -> SkeletonFrame {
        SkeletonFrame {
            frame_index: self.frame_index,
            joints: self.joints.map(|p| p - origin),
        }
    }
}

impl TryFrom<RawFrame> for SkeletonFrame {
    type Error = Vec<FrameViolation>;

    fn try_from(raw: RawFrame) -> Result<Self, Self::Error> {
        let violations = validate_frame(&raw);
        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(SkeletonFrame {
            frame_index: raw.frame_index,
            joints: raw.joints.map(|p| p.expect("validated")),
        })
    }
}

/// The five-movement battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MovementKind {
    ChairRise,
    Stand2FeetEyesOpen,
    Stand2FeetEyesClosed,
    Balance1LegEyesOpen,
    Balance1LegEyesClosed,
}

impl MovementKind {
    pub const ALL: [MovementKind; 5] = [
        MovementKind::ChairRise,
        MovementKind::Stand2FeetEyesOpen,
        MovementKind::Stand2FeetEyesClosed,
        MovementKind::Balance1LegEyesOpen,
        MovementKind::Balance1LegEyesClosed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MovementKind::ChairRise => "ChairRise",
            MovementKind::Stand2FeetEyesOpen => "Stand2FeetEyesOpen",
            MovementKind::Stand2FeetEyesClosed => "Stand2FeetEyesClosed",
            MovementKind::Balance1LegEyesOpen => "Balance1LegEyesOpen",
            MovementKind::Balance1LegEyesClosed => "Balance1LegEyesClosed",
        }
    }

    /// Human-readable label used in the results table.
    pub fn title(self) -> &'static str {
        match self {
            MovementKind::ChairRise => "Chair Rise",
            MovementKind::Stand2FeetEyesOpen => "Stand 2 feet, eyes open",
            MovementKind::Stand2FeetEyesClosed => "Stand 2 feet, eyes closed",
            MovementKind::Balance1LegEyesOpen => "Balance 1 leg, eyes open",
            MovementKind::Balance1LegEyesClosed => "Balance 1 leg, eyes closed",
        }
    }
}

impl fmt::Display for MovementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MovementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MovementKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Data(format!("unknown movement `{s}`")))
    }
}

/// Binary target. Young is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgeGroup {
    Young,
    Older,
}

impl AgeGroup {
    pub fn label(self) -> u8 {
        match self {
            AgeGroup::Young => 1,
            AgeGroup::Older => 0,
        }
    }

    pub fn from_label(label: u8) -> Option<AgeGroup> {
        match label {
            1 => Some(AgeGroup::Young),
            0 => Some(AgeGroup::Older),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AgeGroup::Young => "Young",
            AgeGroup::Older => "Older",
        }
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgeGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            x if x.eq_ignore_ascii_case("young") || x == "1" => Ok(AgeGroup::Young),
            x if x.eq_ignore_ascii_case("older") || x == "0" => Ok(AgeGroup::Older),
            other => Err(Error::Data(format!("unknown age group `{other}`"))),
        }
    }
}

pub const DEFAULT_FRAME_RATE: f64 = 30.0;

/// One subject performing one movement.
///
/// Frames are non-empty and strictly increasing in `frame_index`; both are
/// checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionRecording {
    pub subject_id: String,
    pub movement: MovementKind,
    pub group: AgeGroup,
    pub frame_rate: f64,
    frames: Vec<SkeletonFrame>,
}

impl MotionRecording {
    pub fn new(
        subject_id: impl Into<String>,
        movement: MovementKind,
        group: AgeGroup,
        frame_rate: f64,
        frames: Vec<SkeletonFrame>,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyRecording);
        }
        for w in frames.windows(2) {
            if w[1].frame_index <= w[0].frame_index {
                return Err(Error::FrameOrder(w[1].frame_index, w[0].frame_index));
            }
        }
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(Error::Data(format!("frame rate must be positive, got {frame_rate}")));
        }
        Ok(MotionRecording {
            subject_id: subject_id.into(),
            movement,
            group,
            frame_rate,
            frames,
        })
    }

    /// Builds a recording from unvalidated frames, dropping (with a warning)
    /// every frame that fails [`validate_frame`].
    pub fn from_raw(
        subject_id: impl Into<String>,
        movement: MovementKind,
        group: AgeGroup,
        frame_rate: f64,
        raw: Vec<RawFrame>,
    ) -> Result<Self> {
        let subject_id = subject_id.into();
        let total = raw.len();
        let frames: Vec<SkeletonFrame> = raw
            .into_iter()
            .filter_map(|r| {
                let index = r.frame_index;
                match SkeletonFrame::try_from(r) {
                    Ok(f) => Some(f),
                    Err(v) => {
                        log::warn!("{subject_id}/{movement}: dropping frame {index}: {v:?}");
                        None
                    }
                }
            })
            .collect();
        if frames.len() < total {
            log::info!(
                "{subject_id}/{movement}: kept {} of {total} frames",
                frames.len()
            );
        }
        MotionRecording::new(subject_id, movement, group, frame_rate, frames)
    }

    pub fn frames(&self) -> &[SkeletonFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Identifier shared by every motion vector derived from this recording.
    pub fn group_key(&self) -> String {
        format!("{}/{}", self.subject_id, self.movement)
    }

    /// Rigid translation of every joint in every frame.
    pub fn translated(&self, offset: Vec3) -> MotionRecording {
        MotionRecording {
            frames: self.frames.iter().map(|f| f.translated(offset)).collect(),
            ..self.clone()
        }
    }
}

/// Aligns every frame to the first frame's spine base: each joint of each
/// frame has `frames[0][SpineBase]` subtracted.
pub fn normalize_recording(rec: &MotionRecording) -> Result<MotionRecording> {
    let first = rec.frames.first().ok_or(Error::EmptyRecording)?;
    let origin = first.joint(JointId::SpineBase);
    Ok(MotionRecording {
        frames: rec.frames.iter().map(|f| f.minus(origin)).collect(),
        ..rec.clone()
    })
}


#[cfg(test)]
mod tests {
    use super::test_support::ramp_frame;
    use super::*;
    use proptest::prelude::*;

    fn recording(frames: Vec<SkeletonFrame>) -> MotionRecording {
        MotionRecording::new("s1", MovementKind::ChairRise, AgeGroup::Young, 30.0, frames).unwrap()
    }

    #[test]
    fn joint_vocabulary() {
        assert_eq!(JointId::ALL.len(), 25);
        for (i, j) in JointId::ALL.iter().enumerate() {
            assert_eq!(j.index(), i);
        }
        let mut names: Vec<_> = JointId::ALL.iter().map(|j| j.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 25);
        assert_eq!(JointId::TORSO.len(), 5);
    }

    #[test]
    fn labels_are_fixed() {
        assert_eq!(AgeGroup::Young.label(), 1);
        assert_eq!(AgeGroup::Older.label(), 0);
        assert_eq!(AgeGroup::from_label(1), Some(AgeGroup::Young));
        assert_eq!(AgeGroup::from_label(2), None);
        assert_eq!("older".parse::<AgeGroup>().unwrap(), AgeGroup::Older);
        assert_eq!(
            "stand2feeteyesclosed".parse::<MovementKind>().unwrap(),
            MovementKind::Stand2FeetEyesClosed
        );
    }

    #[test]
    fn validate_complete_frame() {
        let f = ramp_frame(0, Vec3::ZERO, 0.1);
        assert!(validate_frame(&RawFrame::from(&f)).is_empty());
    }

    #[test]
    fn validate_missing_head() {
        let mut raw = RawFrame::from(&ramp_frame(0, Vec3::ZERO, 0.1));
        raw.joints[JointId::Head.index()] = None;
        assert_eq!(validate_frame(&raw), vec![FrameViolation::MissingJoint(JointId::Head)]);
    }

    #[test]
    fn validate_nan_knee() {
        let mut raw = RawFrame::from(&ramp_frame(0, Vec3::ZERO, 0.1));
        raw.joints[JointId::KneeLeft.index()] = Some(Vec3::new(0.0, f64::NAN, 0.0));
        assert_eq!(validate_frame(&raw), vec![FrameViolation::NonFinite(JointId::KneeLeft)]);
    }

    #[test]
    fn recording_invariants() {
        assert!(matches!(
            MotionRecording::new("s", MovementKind::ChairRise, AgeGroup::Young, 30.0, vec![]),
            Err(Error::EmptyRecording)
        ));
        let f = ramp_frame(3, Vec3::ZERO, 0.1);
        let g = ramp_frame(3, Vec3::ZERO, 0.1);
        assert!(matches!(
            MotionRecording::new("s", MovementKind::ChairRise, AgeGroup::Young, 30.0, vec![f, g]),
            Err(Error::FrameOrder(3, 3))
        ));
    }

    #[test]
    fn from_raw_drops_invalid_frames() {
        let mut raws: Vec<RawFrame> = (0..5)
            .map(|i| RawFrame::from(&ramp_frame(i, Vec3::ZERO, 0.1)))
            .collect();
        raws[2].joints[JointId::Head.index()] = None;
        let rec =
            MotionRecording::from_raw("s", MovementKind::ChairRise, AgeGroup::Older, 30.0, raws)
                .unwrap();
        assert_eq!(rec.len(), 4);
        let idx: Vec<u64> = rec.frames().iter().map(|f| f.frame_index()).collect();
        assert_eq!(idx, vec![0, 1, 3, 4]);

        let mut bad = RawFrame::new(0);
        bad.set(JointId::Head, Vec3::ZERO);
        assert!(matches!(
            MotionRecording::from_raw("s", MovementKind::ChairRise, AgeGroup::Older, 30.0, vec![bad]),
            Err(Error::EmptyRecording)
        ));
    }

    #[test]
    fn normalize_identity_at_origin() {
        let f = ramp_frame(0, Vec3::ZERO, 0.1);
        assert_eq!(f.joint(JointId::SpineBase), Vec3::ZERO);
        let rec = recording(vec![f.clone()]);
        let n = normalize_recording(&rec).unwrap();
        assert_eq!(n.frames()[0], f);
    }

    #[test]
    fn normalize_subtracts_first_spine_base() {
        let mut j0 = [Vec3::new(5.0, 5.0, 5.0); JOINT_COUNT];
        j0[JointId::SpineBase.index()] = Vec3::new(1.0, 2.0, 3.0);
        let mut j1 = [Vec3::new(9.0, 9.0, 9.0); JOINT_COUNT];
        j1[JointId::Head.index()] = Vec3::new(1.0, 3.0, 8.0);
        let rec = recording(vec![
            SkeletonFrame::new(0, j0).unwrap(),
            SkeletonFrame::new(1, j1).unwrap(),
        ]);
        let n = normalize_recording(&rec).unwrap();
        assert_eq!(n.frames()[1].joint(JointId::Head), Vec3::new(0.0, 1.0, 5.0));
        assert_eq!(n.frames()[0].joint(JointId::SpineBase), Vec3::ZERO);

        // Independent per-coordinate loop over raw arrays.
        let sb = [1.0, 2.0, 3.0];
        for (fi, src) in [j0, j1].iter().enumerate() {
            for (ji, p) in src.iter().enumerate() {
                let want = [p.x - sb[0], p.y - sb[1], p.z - sb[2]];
                assert_eq!(n.frames()[fi].joints()[ji].to_array(), want);
            }
        }
        assert_eq!(n.subject_id, rec.subject_id);
        assert_eq!(n.movement, rec.movement);
        assert_eq!(n.group, rec.group);
    }

    fn arb_recording() -> impl Strategy<Value = MotionRecording> {
        proptest::collection::vec(
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), JOINT_COUNT),
            1..6,
        )
        .prop_map(|frames| {
            let frames = frames
                .into_iter()
                .enumerate()
                .map(|(i, js)| {
                    let mut joints = [Vec3::ZERO; JOINT_COUNT];
                    for (p, (x, y, z)) in joints.iter_mut().zip(js) {
                        *p = Vec3::new(x, y, z);
                    }
                    SkeletonFrame::new(i as u64, joints).unwrap()
                })
                .collect();
            recording(frames)
        })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(rec in arb_recording()) {
            let once = normalize_recording(&rec).unwrap();
            let twice = normalize_recording(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn normalize_preserves_distances(rec in arb_recording()) {
            let n = normalize_recording(&rec).unwrap();
            for (a, b) in rec.frames().iter().zip(n.frames()) {
                for i in 0..JOINT_COUNT {
                    for j in (i + 1)..JOINT_COUNT {
                        let da = (a.joints()[i] - a.joints()[j]).norm();
                        let db = (b.joints()[i] - b.joints()[j]).norm();
                        prop_assert!((da - db).abs() <= 1e-12 * (1.0 + da));
                    }
                }
            }
        }

        #[test]
        fn normalize_translation_invariant(rec in arb_recording(),
                                           t in (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0)) {
            let t = Vec3::new(t.0, t.1, t.2);
            let a = normalize_recording(&rec).unwrap();
            let b = normalize_recording(&rec.translated(t)).unwrap();
            for (fa, fb) in a.frames().iter().zip(b.frames()) {
                for (pa, pb) in fa.joints().iter().zip(fb.joints()) {
                    prop_assert!((*pa - *pb).norm() <= 1e-12 * (1.0 + t.norm()));
                }
            }
        }
    }
}
