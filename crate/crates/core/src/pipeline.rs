//! Config-driven batch run: ingest every recording in a directory, build
//! motion vectors per movement, cross-validate each configured classifier and
//! write reports plus a manifest.
//!
//! Nothing is written until every stage has succeeded, so a failed run
//! leaves `output_dir` untouched.
//!
//! Seeds: recording `key` clusters with `derive_keyed(seed, "kmeans", key)`;
//! folds use `derive(seed, "folds", 0)`; fold `f` of classifier `c` trains
//! with `derive(seed, c, f)` where `c` is `svm`, `forest` or `deepnet`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::classifiers::{ClassifierConfig, ClassifierKind, DeepNetConfig, ForestConfig, SvmConfig};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, format_table, write_report_csv, write_summary_csv, EvaluationReport};
use crate::representation::{represent_recording, MotionVector, RepresentationConfig, DEFAULT_MAX_ITERS};
use crate::skeleton::io::{list_recordings, parse_recording, TextMetadata};
use crate::skeleton::{AgeGroup, MotionRecording, MovementKind};

fn parse_names<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: std::str::FromStr<Err = Error>,
{
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

fn write_names<S: Serializer, T: std::fmt::Display>(items: &[T], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(items.iter().map(|i| i.to_string()))
}

fn all_movements() -> Vec<MovementKind> {
    MovementKind::ALL.to_vec()
}

fn all_classifiers() -> Vec<ClassifierKind> {
    ClassifierKind::ALL.to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepresentationSection {
    pub family: bool,
    pub max_iters: usize,
}

impl Default for RepresentationSection {
    fn default() -> Self {
        RepresentationSection { family: true, max_iters: DEFAULT_MAX_ITERS }
    }
}

/// TOML run configuration. `data_dir`, `output_dir` and `seed` are required.
///
/// ```toml
/// data_dir = "cohort"
/// output_dir = "results"
/// seed = 7
/// movements = ["ChairRise", "Stand2FeetEyesOpen"]   # default: all five
/// classifiers = ["svm", "rf", "deepnet"]            # default: all three
/// standardize_features = false
///
/// [representation]
/// family = true
/// max_iters = 300
///
/// [svm]
/// kernel = "rbf"
/// c = 1.0
///
/// [random_forest]
/// n_trees = 100
///
/// [deepnet]
/// hidden_layers = [64, 32]
/// epochs = 40
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "all_movements", deserialize_with = "parse_names", serialize_with = "write_names")]
    pub movements: Vec<MovementKind>,
    #[serde(default = "all_classifiers", deserialize_with = "parse_names", serialize_with = "write_names")]
    pub classifiers: Vec<ClassifierKind>,
    #[serde(default)]
    pub standardize_features: bool,
    #[serde(default)]
    pub representation: RepresentationSection,
    #[serde(default)]
    pub svm: SvmConfig,
    #[serde(default)]
    pub random_forest: ForestConfig,
    #[serde(default)]
    pub deepnet: DeepNetConfig,
}

impl PipelineConfig {
    pub fn new(data_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, seed: u64) -> Self {
        PipelineConfig {
            data_dir: data_dir.into(),
            output_dir: output_dir.into(),
            seed,
            movements: all_movements(),
            classifiers: all_classifiers(),
            standardize_features: false,
            representation: RepresentationSection::default(),
            svm: SvmConfig::default(),
            random_forest: ForestConfig::default(),
            deepnet: DeepNetConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        PipelineConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.movements.is_empty() {
            return Err(Error::Config("movements must not be empty".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("classifiers must not be empty".into()));
        }
        if self.representation.max_iters == 0 {
            return Err(Error::Config("representation.max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub fn representation_config(&self) -> RepresentationConfig {
        RepresentationConfig {
            family: self.representation.family,
            standardize_features: self.standardize_features,
            max_iters: self.representation.max_iters,
        }
    }

    pub fn classifier_config(&self) -> ClassifierConfig {
        ClassifierConfig {
            svm: self.svm.clone(),
            random_forest: self.random_forest.clone(),
            deepnet: self.deepnet.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputFile {
    /// Path relative to `data_dir`.
    pub file: String,
    pub sha256: String,
    pub subject_id: String,
    pub movement: String,
    pub group: String,
    pub frames: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassCounts {
    pub young: usize,
    pub older: usize,
}

impl ClassCounts {
    fn add(&mut self, g: AgeGroup) {
        match g {
            AgeGroup::Young => self.young += 1,
            AgeGroup::Older => self.older += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovementCounts {
    pub recordings: ClassCounts,
    pub vectors: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub inputs: Vec<InputFile>,
    pub counts: BTreeMap<String, MovementCounts>,
    pub reports: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<EvaluationReport>,
    pub manifest: Manifest,
    pub table: String,
}

pub fn report_file_name(movement: MovementKind, classifier: ClassifierKind) -> String {
    format!("{}__{}.csv", movement.name(), classifier.name())
}

struct Loaded {
    recordings: Vec<MotionRecording>,
    inputs: Vec<InputFile>,
}

fn load_inputs(cfg: &PipelineConfig) -> Result<Loaded> {
    if !cfg.data_dir.is_dir() {
        return Err(Error::Data(format!("data_dir {} is not a directory", cfg.data_dir.display())));
    }
    let paths = list_recordings(&cfg.data_dir)?;
    if paths.is_empty() {
        return Err(Error::Data(format!("no .json or .txt recordings in {}", cfg.data_dir.display())));
    }
    let parsed: Vec<(MotionRecording, InputFile)> = paths
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::parse(path, e))?;
            let rec = parse_recording(text, path, &TextMetadata::default())?;
            let file = path
                .strip_prefix(&cfg.data_dir)
                .unwrap_or(path)
                .to_string_lossy()
                .replace('\\', "/");
            let input = InputFile {
                file,
                sha256: hex::encode(Sha256::digest(&bytes)),
                subject_id: rec.subject_id.clone(),
                movement: rec.movement.to_string(),
                group: rec.group.to_string(),
                frames: rec.len(),
            };
            Ok((rec, input))
        })
        .collect::<Result<_>>()?;
    let mut seen = BTreeMap::new();
    for (rec, input) in &parsed {
        if let Some(prev) = seen.insert(rec.group_key(), input.file.clone()) {
            return Err(Error::Data(format!(
                "{} and {} both hold recording {}",
                prev,
                input.file,
                rec.group_key()
            )));
        }
    }
    let (recordings, inputs) = parsed.into_iter().unzip();
    Ok(Loaded { recordings, inputs })
}

/// Motion vectors for every recording of `movement`, in input order.
pub fn movement_vectors(
    recordings: &[MotionRecording],
    movement: MovementKind,
    rep: &RepresentationConfig,
    seed: u64,
) -> Result<Vec<MotionVector>> {
    let per_recording: Vec<Vec<MotionVector>> = recordings
        .par_iter()
        .filter(|r| r.movement == movement)
        .map(|r| represent_recording(r, rep, seed))
        .collect::<Result<_>>()?;
    Ok(per_recording.into_iter().flatten().collect())
}

/// Computes every report in memory.
pub fn evaluate(cfg: &PipelineConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let loaded = load_inputs(cfg)?;
    let rep = cfg.representation_config();
    let classifiers = cfg.classifier_config();

    let mut counts = BTreeMap::new();
    let mut by_movement = Vec::new();
    for &m in &cfg.movements {
        let mut rec_counts = ClassCounts::default();
        loaded.recordings.iter().filter(|r| r.movement == m).for_each(|r| rec_counts.add(r.group));
        if rec_counts.young + rec_counts.older == 0 {
            return Err(Error::Data(format!("no recordings of {m} in {}", cfg.data_dir.display())));
        }
        let vectors = movement_vectors(&loaded.recordings, m, &rep, cfg.seed)?;
        let mut vec_counts = ClassCounts::default();
        vectors.iter().for_each(|v| vec_counts.add(v.label));
        log::info!("{m}: {} recordings, {} vectors", rec_counts.young + rec_counts.older, vectors.len());
        counts.insert(m.name().to_string(), MovementCounts { recordings: rec_counts, vectors: vec_counts });
        by_movement.push((m, vectors));
    }

    let cells: Vec<(usize, ClassifierKind)> = (0..by_movement.len())
        .flat_map(|i| cfg.classifiers.iter().map(move |&c| (i, c)))
        .collect();
    let reports = cells
        .par_iter()
        .map(|&(i, c)| {
            let (m, vectors) = &by_movement[i];
            let r = cross_validate(vectors, c, &classifiers, cfg.seed)?;
            log::info!("{m} / {c}: f1 {:.3} mcc {:.3}", r.metrics.f1, r.metrics.mcc);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        inputs: loaded.inputs,
        counts,
        reports: reports.iter().map(|r| format!("reports/{}", report_file_name(r.movement, r.classifier))).collect(),
    };
    let table = format_table(&reports);
    Ok(RunOutcome { reports, manifest, table })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `reports/<Movement>__<Classifier>.csv`, `summary.csv`,
/// `table.txt` and `manifest.json` under `output_dir`.
pub fn write_outputs(output_dir: &Path, outcome: &RunOutcome) -> Result<()> {
    let reports_dir = output_dir.join("reports");
    fs::create_dir_all(&reports_dir).map_err(|e| Error::io(&reports_dir, e))?;
    for r in &outcome.reports {
        let mut buf = Vec::new();
        write_report_csv(&mut buf, r)?;
        write_file(&reports_dir.join(report_file_name(r.movement, r.classifier)), &buf)?;
    }
    let mut summary = Vec::new();
    write_summary_csv(&mut summary, &outcome.reports)?;
    write_file(&output_dir.join("summary.csv"), &summary)?;
    write_file(&output_dir.join("table.txt"), outcome.table.as_bytes())?;
    let mut manifest = serde_json::to_string_pretty(&outcome.manifest).expect("manifest serializes");
    manifest.push('\n');
    write_file(&output_dir.join("manifest.json"), manifest.as_bytes())
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutcome> {
    let outcome = evaluate(cfg)?;
    write_outputs(&cfg.output_dir, &outcome)?;
    Ok(outcome)
}
