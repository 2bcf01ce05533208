//! Recording file formats.
//!
//! The canonical format is one JSON document per recording:
//!
//! ```json
//! {"subject_id": "S001", "movement": "ChairRise", "group": "Young",
//!  "frame_rate": 30.0, "frames": [[[x, y, z], ... 25 joints], ...]}
//! ```
//!
//! Joints are listed in [`JointId`] declaration order (the Kinect v2 SDK
//! `JointType` order). An untracked joint is written as `null`.
//!
//! The plain-text adapter reads one frame per line, 75 whitespace-separated
//! floats (x y z for each joint in the same order). Lines starting with `#`
//! are comments; `# key: value` comments before the first data line may carry
//! `subject_id`, `movement`, `group` and `frame_rate`. This column layout is
//! our own convention for K3Da-style exports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    AgeGroup, JointId, MotionRecording, MovementKind, RawFrame, Vec3, DEFAULT_FRAME_RATE,
    JOINT_COUNT,
};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct RecordingFile {
    subject_id: String,
    movement: MovementKind,
    group: AgeGroup,
    #[serde(default = "default_frame_rate")]
    frame_rate: f64,
    frames: Vec<Vec<Option<[f64; 3]>>>,
}

fn default_frame_rate() -> f64 {
    DEFAULT_FRAME_RATE
}

pub fn parse_json_recording(text: &str, origin: &Path) -> Result<MotionRecording> {
    let file: RecordingFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
    let mut raw = Vec::with_capacity(file.frames.len());
    for (i, joints) in file.frames.into_iter().enumerate() {
        if joints.len() != JOINT_COUNT {
            return Err(Error::parse(
                origin,
                format!("frame {i} has {} joints, expected {JOINT_COUNT}", joints.len()),
            ));
        }
        let mut frame = RawFrame::new(i as u64);
        for (slot, p) in frame.joints.iter_mut().zip(joints) {
            *slot = p.map(Vec3::from);
        }
        raw.push(frame);
    }
    MotionRecording::from_raw(file.subject_id, file.movement, file.group, file.frame_rate, raw)
}

pub fn recording_to_json(rec: &MotionRecording) -> String {
    let file = RecordingFile {
        subject_id: rec.subject_id.clone(),
        movement: rec.movement,
        group: rec.group,
        frame_rate: rec.frame_rate,
        frames: rec
            .frames()
            .iter()
            .map(|f| f.joints().iter().map(|p| Some(p.to_array())).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("recording serializes")
}

/// Metadata for text recordings; fields left `None` must come from the
/// file's header comments.
#[derive(Debug, Clone, Default)]
pub struct TextMetadata {
    pub subject_id: Option<String>,
    pub movement: Option<MovementKind>,
    pub group: Option<AgeGroup>,
    pub frame_rate: Option<f64>,
}

pub fn parse_text_recording(
    text: &str,
    origin: &Path,
    overrides: &TextMetadata,
) -> Result<MotionRecording> {
    let mut header = TextMetadata::default();
    let mut raw = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "subject_id" => header.subject_id = Some(value.to_string()),
                    "movement" => header.movement = Some(value.parse()?),
                    "group" => header.group = Some(value.parse()?),
                    "frame_rate" => {
                        header.frame_rate = Some(value.parse().map_err(|e| {
                            Error::parse(origin, format!("line {}: frame_rate: {e}", line_no + 1))
                        })?)
                    }
                    _ => {}
                }
            }
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(origin, format!("line {}: {e}", line_no + 1)))?;
        if values.len() != 3 * JOINT_COUNT {
            return Err(Error::parse(
                origin,
                format!(
                    "line {}: {} values, expected {}",
                    line_no + 1,
                    values.len(),
                    3 * JOINT_COUNT
                ),
            ));
        }
        let mut frame = RawFrame::new(raw.len() as u64);
        for (slot, xyz) in frame.joints.iter_mut().zip(values.chunks_exact(3)) {
            *slot = Some(Vec3::new(xyz[0], xyz[1], xyz[2]));
        }
        raw.push(frame);
    }
    let missing = |what: &str| Error::parse(origin, format!("no {what} in header or arguments"));
    let subject_id = overrides
        .subject_id
        .clone()
        .or(header.subject_id)
        .ok_or_else(|| missing("subject_id"))?;
    let movement = overrides.movement.or(header.movement).ok_or_else(|| missing("movement"))?;
    let group = overrides.group.or(header.group).ok_or_else(|| missing("group"))?;
    let frame_rate = overrides
        .frame_rate
        .or(header.frame_rate)
        .unwrap_or(DEFAULT_FRAME_RATE);
    MotionRecording::from_raw(subject_id, movement, group, frame_rate, raw)
}

pub fn recording_to_text(rec: &MotionRecording) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# subject_id: {}", rec.subject_id);
    let _ = writeln!(out, "# movement: {}", rec.movement);
    let _ = writeln!(out, "# group: {}", rec.group);
    let _ = writeln!(out, "# frame_rate: {}", rec.frame_rate);
    let _ = writeln!(
        out,
        "# columns: {}",
        JointId::ALL.map(|j| j.name()).join(" ")
    );
    for f in rec.frames() {
        let line: Vec<String> = f
            .joints()
            .iter()
            .flat_map(|p| p.to_array())
            .map(|v| v.to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a `.json` recording, or a `.txt` recording with metadata taken from
/// its header.
pub fn read_recording(path: &Path) -> Result<MotionRecording> {
    read_recording_with(path, &TextMetadata::default())
}

pub fn read_recording_with(path: &Path, meta: &TextMetadata) -> Result<MotionRecording> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_recording(&text, path, meta)
}

/// Parses already-loaded file contents, choosing the format from `path`'s
/// extension.
pub fn parse_recording(text: &str, path: &Path, meta: &TextMetadata) -> Result<MotionRecording> {
    match extension(path).as_deref() {
        Some("json") => parse_json_recording(text, path),
        Some("txt") => parse_text_recording(text, path, meta),
        _ => Err(Error::parse(path, "expected a .json or .txt recording")),
    }
}

pub fn write_json_recording(path: &Path, rec: &MotionRecording) -> Result<()> {
    fs::write(path, recording_to_json(rec)).map_err(|e| Error::io(path, e))
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

/// Recording files (`.json`, `.txt`) directly inside `dir`, sorted by name.
pub fn list_recordings(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && matches!(extension(&path).as_deref(), Some("json" | "txt")) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::test_support::ramp_frame;

    fn sample() -> MotionRecording {
        let frames = (0..3)
            .map(|i| ramp_frame(i, Vec3::new(0.1 * i as f64, -0.3, 2.5), 0.01))
            .collect();
        MotionRecording::new(
            "S007",
            MovementKind::Balance1LegEyesOpen,
            AgeGroup::Older,
            30.0,
            frames,
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let rec = sample();
        let text = recording_to_json(&rec);
        let back = parse_json_recording(&text, Path::new("mem.json")).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn json_null_joint_drops_frame() {
        let rec = sample();
        let text = recording_to_json(&rec);
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["frames"][1][JointId::Head.index()] = serde_json::Value::Null;
        let back = parse_json_recording(&value.to_string(), Path::new("mem.json")).unwrap();
        assert_eq!(back.len(), 2);
    }

    #[test]
    fn json_wrong_joint_count() {
        let text = r#"{"subject_id":"a","movement":"ChairRise","group":"Young","frames":[[[0,0,0]]]}"#;
        assert!(matches!(
            parse_json_recording(text, Path::new("x.json")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let rec = sample();
        let text = recording_to_text(&rec);
        let back = parse_text_recording(&text, Path::new("x.txt"), &TextMetadata::default()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn text_overrides_and_nan() {
        let rec = sample();
        let mut text = String::new();
        for (i, line) in recording_to_text(&rec).lines().filter(|l| !l.starts_with('#')).enumerate() {
            if i == 0 {
                let mut toks: Vec<&str> = line.split(' ').collect();
                toks[5] = "NaN";
                text.push_str(&toks.join(" "));
            } else {
                text.push_str(line);
            }
            text.push('\n');
        }
        let meta = TextMetadata {
            subject_id: Some("K3".into()),
            movement: Some(MovementKind::ChairRise),
            group: Some(AgeGroup::Young),
            frame_rate: None,
        };
        let back = parse_text_recording(&text, Path::new("x.txt"), &meta).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.subject_id, "K3");
        assert_eq!(back.frame_rate, DEFAULT_FRAME_RATE);

        let err = parse_text_recording(&text, Path::new("x.txt"), &TextMetadata::default());
        assert!(matches!(err, Err(Error::Parse { .. })));
    }

    #[test]
    fn text_short_line_rejected() {
        let text = "# subject_id: a\n# movement: ChairRise\n# group: Young\n1 2 3\n";
        assert!(parse_text_recording(text, Path::new("x.txt"), &TextMetadata::default()).is_err());
    }
}
