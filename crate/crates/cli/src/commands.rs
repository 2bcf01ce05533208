use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use motionkit_core::classifiers::{train as train_model, ClassifierConfig, TrainedModel, TrainingSet};
use motionkit_core::features::{encode_recording, write_features_csv};
use motionkit_core::pipeline::{run_pipeline, PipelineConfig};
use motionkit_core::representation::{
    centroid_motion_vector, cluster_features, read_motion_vectors_csv, represent_recording, write_motion_vectors_csv,
    Provenance,
};
use motionkit_core::skeleton::io::{list_recordings, read_recording, write_json_recording};
use motionkit_core::skeleton::normalize_recording;
use motionkit_core::synth::{generate_cohort, recording_file_name, CohortConfig};
use motionkit_core::{seed, AgeGroup, Error, MotionRecording, RepresentationConfig, Result};

use crate::{EncodeArgs, PredictArgs, RepresentArgs, RunArgs, SynthArgs, TrainArgs};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Runs `body` against the named file, or standard output.
fn with_output(out: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            body(&mut w)?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn run(a: RunArgs) -> Result<()> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(d) = a.data_dir {
        cfg.data_dir = d;
    }
    if let Some(o) = a.output_dir {
        cfg.output_dir = o;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(z) = a.standardize_features {
        cfg.standardize_features = z;
    }
    let outcome = run_pipeline(&cfg)?;
    print!("{}", outcome.table);
    println!("wrote {} reports to {}", outcome.reports.len(), cfg.output_dir.display());
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let mut cfg = CohortConfig::with_subjects(a.subjects);
    if let Some(y) = a.young {
        if y > a.subjects {
            return Err(Error::Config(format!("--young {y} exceeds --subjects {}", a.subjects)));
        }
        cfg.young = y;
        cfg.older = a.subjects - y;
    }
    if !a.movements.is_empty() {
        cfg.movements = a.movements;
    }
    cfg.stand_duration = a.duration;
    let cohort = generate_cohort(&cfg, a.seed)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for rec in &cohort {
        write_json_recording(&a.out.join(recording_file_name(rec)), rec)?;
    }
    println!(
        "wrote {} recordings ({} young, {} older subjects) to {}",
        cohort.len(),
        cfg.young,
        cfg.older,
        a.out.display()
    );
    Ok(())
}

pub fn encode(a: EncodeArgs) -> Result<()> {
    let rec = read_recording(&a.input)?;
    let rec = if a.raw { rec } else { normalize_recording(&rec)? };
    let features = encode_recording(&rec)?;
    with_output(a.out.as_deref(), |w| write_features_csv(w, &features))
}

fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            files.extend(list_recordings(p)?);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::Data("no recordings found".into()));
    }
    Ok(files)
}

pub fn represent(a: RepresentArgs) -> Result<()> {
    let cfg = RepresentationConfig {
        family: !a.centroid,
        standardize_features: a.standardize_features,
        ..RepresentationConfig::default()
    };
    let mut vectors = Vec::new();
    for path in collect_inputs(&a.inputs)? {
        let rec = read_recording(&path)?;
        if a.movement.is_some_and(|m| m != rec.movement) {
            continue;
        }
        vectors.extend(represent_recording(&rec, &cfg, a.seed)?);
    }
    if vectors.is_empty() {
        return Err(Error::Data("no recordings matched".into()));
    }
    with_output(a.out.as_deref(), |w| write_motion_vectors_csv(w, &vectors))
}

pub fn train(a: TrainArgs) -> Result<()> {
    let cfg: ClassifierConfig = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => ClassifierConfig::default(),
    };
    let file = File::open(&a.vectors).map_err(|e| Error::io(&a.vectors, e))?;
    let vectors = read_motion_vectors_csv(file)?;
    let data = TrainingSet::from_vectors(&vectors)?;
    let model = train_model(a.classifier, &data, &cfg, seed::derive(a.seed, a.classifier.name(), 0))?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    model.save(&a.out)?;
    println!("trained {} on {} vectors of dimension {}", a.classifier, data.len(), data.d());
    Ok(())
}

/// The recording's single centroid motion vector.
fn centroid_vector(rec: &MotionRecording, seed_value: u64) -> Result<Vec<f64>> {
    let features: Vec<_> = encode_recording(&normalize_recording(rec)?)?.iter().map(|f| f.to_array()).collect();
    let model = cluster_features(
        &features,
        rec.movement,
        &RepresentationConfig::default(),
        seed::derive_keyed(seed_value, "kmeans", &rec.group_key()),
    )?;
    Ok(centroid_motion_vector(&model, &Provenance::from(rec)).values)
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let model = TrainedModel::load(&a.model)?;
    let rec = read_recording(&a.input)?;
    let x = centroid_vector(&rec, a.seed)?;
    let p = model.predict(&x)?;
    let group = AgeGroup::from_label(p.label).expect("binary label");
    println!("{group} {:.2}", p.score);
    Ok(())
}
