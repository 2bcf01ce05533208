//! Binary young/older classifiers behind one train/predict contract.
//!
//! All three produce a score in `[0, 1]`; the label is `1` (Young) when the
//! score is at least `0.5`. The SVM maps its margin through a logistic
//! function, the forest reports the fraction of trees voting Young and the
//! network reports its sigmoid output.

pub mod deepnet;
pub mod forest;
pub mod standardize;
pub mod svm;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use deepnet::{DeepNetConfig, DeepNetModel};
pub use forest::{ForestConfig, RandomForest};
pub use svm::{Kernel, SvmConfig, SvmModel};

use crate::error::{Error, Result};
use crate::representation::MotionVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    Svm,
    RandomForest,
    DeepNet,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::Svm,
        ClassifierKind::RandomForest,
        ClassifierKind::DeepNet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "Svm",
            ClassifierKind::RandomForest => "RandomForest",
            ClassifierKind::DeepNet => "DeepNet",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "SVM",
            ClassifierKind::RandomForest => "Random Forest",
            ClassifierKind::DeepNet => "Deep Learning",
        }
    }

    pub(crate) fn seed_stage(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::RandomForest => "forest",
            ClassifierKind::DeepNet => "deepnet",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.to_ascii_lowercase().as_str() {
            "svm" => Ok(ClassifierKind::Svm),
            "randomforest" | "rf" | "forest" => Ok(ClassifierKind::RandomForest),
            "deepnet" | "dnn" | "mlp" => Ok(ClassifierKind::DeepNet),
            _ => Err(Error::Config(format!("unknown classifier `{s}`"))),
        }
    }
}

/// Rows of equal dimensionality with 0/1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    d: usize,
}

impl TrainingSet {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let d = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: r.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Data(format!("label {l} is not 0 or 1")));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite feature value".into()));
        }
        Ok(TrainingSet { rows, labels, d })
    }

    pub fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a MotionVector>) -> Result<Self> {
        let (rows, labels): (Vec<_>, Vec<_>) = vectors
            .into_iter()
            .map(|v| (v.values.clone(), v.label.label()))
            .unzip();
        TrainingSet::new(rows, labels)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Every row repeated `times` times, in order.
    pub fn repeated(&self, times: usize) -> TrainingSet {
        TrainingSet {
            rows: self.rows.iter().flat_map(|r| std::iter::repeat_n(r.clone(), times)).collect(),
            labels: self.labels.iter().flat_map(|&l| std::iter::repeat_n(l, times)).collect(),
            d: self.d,
        }
    }

    pub(crate) fn check_trainable(&self) -> Result<()> {
        if self.rows.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                actual: self.rows.len(),
            });
        }
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        if ones == 0 || ones == self.labels.len() {
            return Err(Error::SingleClass);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: u8,
    pub score: f64,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Prediction {
            label: u8::from(score >= 0.5),
            score,
        }
    }
}

/// Hyperparameters for all three classifiers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub svm: SvmConfig,
    pub random_forest: ForestConfig,
    pub deepnet: DeepNetConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelParameters {
    Svm(SvmModel),
    RandomForest(RandomForest),
    DeepNet(DeepNetModel),
}

/// A fitted classifier with its expected input dimensionality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub d: usize,
    pub parameters: ModelParameters,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.parameters {
            ModelParameters::Svm(_) => ClassifierKind::Svm,
            ModelParameters::RandomForest(_) => ClassifierKind::RandomForest,
            ModelParameters::DeepNet(_) => ClassifierKind::DeepNet,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: x.len(),
            });
        }
        let score = match &self.parameters {
            ModelParameters::Svm(m) => m.score(x),
            ModelParameters::RandomForest(m) => m.score(x),
            ModelParameters::DeepNet(m) => m.score(x),
        };
        Ok(Prediction::from_score(score))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("model file: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrainedModel::from_json(&text)
    }
}

pub fn train(kind: ClassifierKind, data: &TrainingSet, cfg: &ClassifierConfig, seed: u64) -> Result<TrainedModel> {
    let parameters = match kind {
        ClassifierKind::Svm => ModelParameters::Svm(svm::train_svm(data, &cfg.svm)?),
        ClassifierKind::RandomForest => {
            ModelParameters::RandomForest(forest::train_random_forest(data, &cfg.random_forest, seed)?)
        }
        ClassifierKind::DeepNet => ModelParameters::DeepNet(deepnet::train_deepnet(data, &cfg.deepnet, seed)?),
    };
    Ok(TrainedModel { d: data.d(), parameters })
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
pub(crate) mod test_data {
    use super::TrainingSet;
    use crate::seed;
    use rand_distr::{Distribution, Normal};

    /// Two Gaussian blobs centred at `-sep/2` and `+sep/2` on every axis.
    pub fn blobs(n_per_class: usize, d: usize, sep: f64, seed: u64) -> TrainingSet {
        let mut rng = seed::rng(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..2 * n_per_class {
            let label = (i % 2) as u8;
            let centre = if label == 1 { sep / 2.0 } else { -sep / 2.0 };
            rows.push((0..d).map(|_| centre + noise.sample(&mut rng)).collect());
            labels.push(label);
        }
        TrainingSet::new(rows, labels).unwrap()
    }

    pub fn accuracy(model: &super::TrainedModel, data: &TrainingSet) -> f64 {
        let hits = data
            .rows()
            .iter()
            .zip(data.labels())
            .filter(|(x, &y)| model.predict(x).unwrap().label == y)
            .count();
        hits as f64 / data.len() as f64
    }
}
