//! Synthetic young-like and older-like skeleton recordings.
//!
//! A standing (or, for the chair rise, sit-to-stand cycling) template is
//! swayed in the medio-lateral and antero-posterior directions by two
//! superposed sinusoids, leant forward by `lean_bias`, then perturbed by
//! Gaussian joint noise. Sway displacement grows linearly with joint height
//! so the feet stay planted.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::skeleton::{AgeGroup, JointId, MotionRecording, MovementKind, SkeletonFrame, Vec3, DEFAULT_FRAME_RATE, JOINT_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwayProfile {
    /// Peak medio-lateral sway at head height, meters.
    pub ml_amplitude: f64,
    /// Peak antero-posterior sway at head height, meters.
    pub ap_amplitude: f64,
    /// Hz.
    pub sway_frequency: f64,
    /// Constant forward trunk inclination, radians.
    pub lean_bias: f64,
    /// Seconds for the five sit-to-stand cycles.
    pub chair_rise_duration: f64,
    /// Per-coordinate joint noise, meters.
    pub noise_sigma: f64,
}

impl SwayProfile {
    pub fn validate(&self, frame_rate: f64) -> Result<()> {
        let fields = [
            ("ml_amplitude", self.ml_amplitude),
            ("ap_amplitude", self.ap_amplitude),
            ("sway_frequency", self.sway_frequency),
            ("lean_bias", self.lean_bias),
            ("chair_rise_duration", self.chair_rise_duration),
            ("noise_sigma", self.noise_sigma),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(format!("{name} must be finite and nonnegative, got {v}")));
        }
        // The second sway harmonic runs at 1.7x the base frequency.
        if self.sway_frequency * SECOND_HARMONIC >= frame_rate / 2.0 {
            return Err(Error::Config(format!(
                "sway_frequency {} Hz is too close to the Nyquist limit of {} fps",
                self.sway_frequency, frame_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profiles {
    pub young: SwayProfile,
    pub older: SwayProfile,
}

impl Profiles {
    pub fn for_group(&self, group: AgeGroup) -> &SwayProfile {
        match group {
            AgeGroup::Young => &self.young,
            AgeGroup::Older => &self.older,
        }
    }
}

impl Default for Profiles {
    fn default() -> Self {
        default_profiles()
    }
}

/// Young: 5 mm ML / 6 mm AP sway at 0.25 Hz, 0.03 rad lean, 10 s chair rise.
/// Older: 20 mm / 25 mm at 0.35 Hz, 0.10 rad lean, 14 s chair rise.
/// Both use 3 mm joint noise.
pub fn default_profiles() -> Profiles {
    Profiles {
        young: SwayProfile {
            ml_amplitude: 0.005,
            ap_amplitude: 0.006,
            sway_frequency: 0.25,
            lean_bias: 0.03,
            chair_rise_duration: 10.0,
            noise_sigma: 0.003,
        },
        older: SwayProfile {
            ml_amplitude: 0.02,
            ap_amplitude: 0.025,
            sway_frequency: 0.35,
            lean_bias: 0.10,
            chair_rise_duration: 14.0,
            noise_sigma: 0.003,
        },
    }
}

const SECOND_HARMONIC: f64 = 1.7;
const CHAIR_CYCLES: f64 = 5.0;
/// Peak extra trunk flexion while rising, as a multiple of `lean_bias`.
const CHAIR_FLEXION_GAIN: f64 = 1.0;
const HEAD_HEIGHT: f64 = 1.65;

fn sway_multiplier(m: MovementKind) -> f64 {
    match m {
        MovementKind::ChairRise | MovementKind::Stand2FeetEyesOpen => 1.0,
        MovementKind::Stand2FeetEyesClosed => 1.5,
        MovementKind::Balance1LegEyesOpen => 2.0,
        MovementKind::Balance1LegEyesClosed => 3.0,
    }
}

type Pose = [Vec3; JOINT_COUNT];

fn pose(points: [(JointId, [f64; 3]); JOINT_COUNT]) -> Pose {
    let mut p = [Vec3::ZERO; JOINT_COUNT];
    for (j, [x, y, z]) in points {
        p[j.index()] = Vec3::new(x, y, z);
    }
    p
}

/// Standing template in meters, floor at y = 0, +x to the subject's left,
/// +z anterior.
fn standing(arms_crossed: bool) -> Pose {
    use JointId::*;
    let (el, wl, hl, tl, thl) = if arms_crossed {
        ([0.16, 1.22, 0.10], [-0.02, 1.32, 0.16], [-0.07, 1.35, 0.16], [-0.11, 1.37, 0.16], [-0.06, 1.38, 0.18])
    } else {
        ([0.20, 1.15, 0.02], [0.21, 0.92, 0.05], [0.21, 0.85, 0.06], [0.21, 0.78, 0.07], [0.19, 0.84, 0.09])
    };
    let mirror = |[x, y, z]: [f64; 3]| [-x, y, z];
    pose([
        (SpineBase, [0.0, 0.95, 0.0]),
        (SpineMid, [0.0, 1.20, 0.0]),
        (Neck, [0.0, 1.52, 0.0]),
        (Head, [0.0, 1.65, 0.01]),
        (ShoulderLeft, [0.18, 1.42, 0.0]),
        (ElbowLeft, el),
        (WristLeft, wl),
        (HandLeft, hl),
        (ShoulderRight, [-0.18, 1.42, 0.0]),
        (ElbowRight, mirror(el)),
        (WristRight, mirror(wl)),
        (HandRight, mirror(hl)),
        (HipLeft, [0.09, 0.93, 0.0]),
        (KneeLeft, [0.10, 0.50, 0.02]),
        (AnkleLeft, [0.10, 0.08, -0.02]),
        (FootLeft, [0.10, 0.03, 0.10]),
        (HipRight, [-0.09, 0.93, 0.0]),
        (KneeRight, [-0.10, 0.50, 0.02]),
        (AnkleRight, [-0.10, 0.08, -0.02]),
        (FootRight, [-0.10, 0.03, 0.10]),
        (SpineShoulder, [0.0, 1.45, 0.0]),
        (HandTipLeft, tl),
        (ThumbLeft, thl),
        (HandTipRight, mirror(tl)),
        (ThumbRight, mirror(thl)),
    ])
}

/// Right leg lifted with the knee forward.
fn one_leg(mut p: Pose) -> Pose {
    p[JointId::KneeRight.index()] = Vec3::new(-0.10, 0.62, 0.25);
    p[JointId::AnkleRight.index()] = Vec3::new(-0.10, 0.30, 0.20);
    p[JointId::FootRight.index()] = Vec3::new(-0.10, 0.18, 0.28);
    p
}

/// Seated on a chair behind the feet: pelvis lowered and moved back, thighs
/// horizontal. Joints above the pelvis keep their standing offsets.
fn seated(stand: &Pose) -> Pose {
    use JointId::*;
    let mut p = *stand;
    let drop = Vec3::new(0.0, 0.50 - 0.95, -0.42);
    for j in upper_body() {
        p[j.index()] = stand[j.index()] + drop;
    }
    for (hip, knee, ankle, foot, x) in [
        (HipLeft, KneeLeft, AnkleLeft, FootLeft, 0.09),
        (HipRight, KneeRight, AnkleRight, FootRight, -0.09),
    ] {
        p[hip.index()] = Vec3::new(x, 0.48, -0.42);
        p[knee.index()] = Vec3::new(x * 1.1, 0.50, 0.0);
        p[ankle.index()] = Vec3::new(x * 1.1, 0.08, 0.02);
        p[foot.index()] = Vec3::new(x * 1.1, 0.03, 0.12);
    }
    p
}

fn upper_body() -> impl Iterator<Item = JointId> {
    JointId::ALL.into_iter().filter(|j| {
        !matches!(
            j,
            JointId::HipLeft
                | JointId::KneeLeft
                | JointId::AnkleLeft
                | JointId::FootLeft
                | JointId::HipRight
                | JointId::KneeRight
                | JointId::AnkleRight
                | JointId::FootRight
        )
    })
}

/// Physical variation of one synthetic subject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub height_scale: f64,
    /// Sensor-frame position of the floor point under the subject.
    pub origin: Vec3,
}

impl Default for Body {
    fn default() -> Self {
        Body { height_scale: 1.0, origin: Vec3::new(0.0, -0.9, 2.5) }
    }
}

struct Phases {
    ml: [f64; 2],
    ap: [f64; 2],
}

fn sway(amplitude: f64, f: f64, t: f64, phase: [f64; 2]) -> f64 {
    let w = 2.0 * PI * f * t;
    amplitude * ((w + phase[0]).sin() + 0.5 * (SECOND_HARMONIC * w + phase[1]).sin()) / 1.5
}

/// Lean rotation about the pelvis in the sagittal plane; positive tips the
/// trunk forward.
fn lean(p: Vec3, pivot: Vec3, angle: f64) -> Vec3 {
    let d = p - pivot;
    let (s, c) = angle.sin_cos();
    pivot + Vec3::new(d.x, d.y * c - d.z * s, d.y * s + d.z * c)
}

/// One recording with the default body, labelled Young with subject id
/// `synthetic`. Callers relabel through the public fields.
pub fn generate_recording(movement: MovementKind, profile: &SwayProfile, duration_s: f64, seed: u64) -> MotionRecording {
    generate_with_body(movement, profile, &Body::default(), duration_s, seed)
}

pub fn generate_with_body(
    movement: MovementKind,
    profile: &SwayProfile,
    body: &Body,
    duration_s: f64,
    seed: u64,
) -> MotionRecording {
    assert!(duration_s > 0.0, "duration must be positive");
    let fps = DEFAULT_FRAME_RATE;
    let n = ((duration_s * fps).round() as usize).max(1);
    let mut rng = seed::rng(seed);
    let mut phase = || rng.random_range(0.0..2.0 * PI);
    let phases = Phases { ml: [phase(), phase()], ap: [phase(), phase()] };
    let noise = Normal::new(0.0, profile.noise_sigma).expect("finite sigma");

    let chair = movement == MovementKind::ChairRise;
    let stand = match movement {
        MovementKind::ChairRise => standing(true),
        MovementKind::Balance1LegEyesOpen | MovementKind::Balance1LegEyesClosed => one_leg(standing(false)),
        _ => standing(false),
    };
    let sit = seated(&stand);
    let k = sway_multiplier(movement);
    let (ml_amp, ap_amp) = (profile.ml_amplitude * k, profile.ap_amplitude * k);

    let frames = (0..n)
        .map(|i| {
            let t = i as f64 / fps;
            let (mut joints, trunk) = if chair {
                let s = 0.5 - 0.5 * (2.0 * PI * CHAIR_CYCLES * t / duration_s).cos();
                let joints: Pose = std::array::from_fn(|j| sit[j] * (1.0 - s) + stand[j] * s);
                (joints, profile.lean_bias * (1.0 + CHAIR_FLEXION_GAIN * (PI * s).sin()))
            } else {
                (stand, profile.lean_bias)
            };
            let pivot = joints[JointId::SpineBase.index()];
            for j in upper_body() {
                joints[j.index()] = lean(joints[j.index()], pivot, trunk);
            }
            let dx = sway(ml_amp, profile.sway_frequency, t, phases.ml);
            let dz = sway(ap_amp, profile.sway_frequency, t, phases.ap);
            let joints: Pose = std::array::from_fn(|j| {
                let p = joints[j];
                let h = p.y / HEAD_HEIGHT;
                let jitter = if profile.noise_sigma > 0.0 {
                    Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng))
                } else {
                    Vec3::ZERO
                };
                body.origin + (Vec3::new(p.x + h * dx, p.y, p.z + h * dz) + jitter) * body.height_scale
            });
            SkeletonFrame::new(i as u64, joints).expect("synthetic joints are finite")
        })
        .collect();
    MotionRecording::new("synthetic", movement, AgeGroup::Young, fps, frames)
        .expect("synthetic frames are ordered")
}

/// Cohort layout and per-subject variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    pub young: usize,
    pub older: usize,
    pub movements: Vec<MovementKind>,
    /// Stand and balance recordings last this long; chair rises use the
    /// profile's duration.
    pub stand_duration: f64,
    pub profiles: Profiles,
    /// Each amplitude, the lean and the chair duration are scaled by a
    /// uniform factor in `1 ± profile_jitter`.
    pub profile_jitter: f64,
    /// Body height varies uniformly in `1 ± height_jitter`.
    pub height_jitter: f64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            young: 26,
            older: 28,
            movements: MovementKind::ALL.to_vec(),
            stand_duration: 10.0,
            profiles: default_profiles(),
            profile_jitter: 0.2,
            height_jitter: 0.08,
        }
    }
}

impl CohortConfig {
    /// Splits `subjects` in the default 26:28 young-to-older ratio.
    pub fn with_subjects(subjects: usize) -> Self {
        let young = (subjects * 26 + 27) / 54;
        CohortConfig { young, older: subjects - young, ..Default::default() }
    }
}

pub fn subject_id(group: AgeGroup, index: usize) -> String {
    match group {
        AgeGroup::Young => format!("Y{:03}", index + 1),
        AgeGroup::Older => format!("O{:03}", index + 1),
    }
}

fn jittered(p: &SwayProfile, j: f64, rng: &mut seed::Rng) -> SwayProfile {
    let mut f = || if j > 0.0 { rng.random_range(1.0 - j..=1.0 + j) } else { 1.0 };
    SwayProfile {
        ml_amplitude: p.ml_amplitude * f(),
        ap_amplitude: p.ap_amplitude * f(),
        sway_frequency: p.sway_frequency * f(),
        lean_bias: p.lean_bias * f(),
        chair_rise_duration: p.chair_rise_duration * f(),
        noise_sigma: p.noise_sigma,
    }
}

/// Every (subject, movement) recording of a cohort, young subjects first.
/// Subject `id` draws its body and profile from a seed keyed by `id`, and
/// each movement from a further derived seed.
pub fn generate_cohort(cfg: &CohortConfig, seed: u64) -> Result<Vec<MotionRecording>> {
    cfg.profiles.young.validate(DEFAULT_FRAME_RATE)?;
    cfg.profiles.older.validate(DEFAULT_FRAME_RATE)?;
    if !(cfg.stand_duration > 0.0) || !(0.0..1.0).contains(&cfg.profile_jitter) || !(0.0..1.0).contains(&cfg.height_jitter) {
        return Err(Error::Config("stand_duration must be positive and jitters in [0, 1)".into()));
    }
    let subjects = (0..cfg.young)
        .map(|i| (AgeGroup::Young, i))
        .chain((0..cfg.older).map(|i| (AgeGroup::Older, i)));
    let mut out = Vec::new();
    for (group, i) in subjects {
        let id = subject_id(group, i);
        let subject_seed = seed::derive_keyed(seed, "synth", &id);
        let mut rng = seed::rng(subject_seed);
        let profile = jittered(cfg.profiles.for_group(group), cfg.profile_jitter, &mut rng);
        let h = cfg.height_jitter;
        let body = Body {
            height_scale: if h > 0.0 { rng.random_range(1.0 - h..=1.0 + h) } else { 1.0 },
            origin: Vec3::new(
                rng.random_range(-0.1..=0.1),
                -0.9 + rng.random_range(-0.05..=0.05),
                2.5 + rng.random_range(-0.3..=0.3),
            ),
        };
        for &m in &cfg.movements {
            let duration = if m == MovementKind::ChairRise { profile.chair_rise_duration } else { cfg.stand_duration };
            let mut rec = generate_with_body(m, &profile, &body, duration, seed::derive_keyed(subject_seed, "movement", m.name()));
            rec.subject_id = id.clone();
            rec.group = group;
            out.push(rec);
        }
    }
    Ok(out)
}

/// File name used when a cohort is written to disk.
pub fn recording_file_name(rec: &MotionRecording) -> String {
    format!("{}_{}.json", rec.subject_id, rec.movement)
}
