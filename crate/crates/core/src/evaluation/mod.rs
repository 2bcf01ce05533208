//! Grouped, stratified k-fold cross-validation and the five-metric report.

pub mod folds;
pub mod metrics;
pub mod report;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use folds::{make_folds, DEFAULT_FOLDS};
pub use metrics::{compute_metrics, ConfusionMatrix, MetricName, Metrics};
pub use report::{format_table, summary_csv, write_report_csv, write_summary_csv};

use crate::classifiers::{train, ClassifierConfig, ClassifierKind, TrainingSet};
use crate::error::{Error, Result};
use crate::representation::MotionVector;
use crate::seed;
use crate::skeleton::MovementKind;

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub movement: MovementKind,
    pub classifier: ClassifierKind,
    pub folds: Vec<ConfusionMatrix>,
    pub pooled: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Fails with [`Error::Leakage`] if any recording contributes vectors to both
/// the training and the test side of a fold.
pub fn check_no_leakage(vectors: &[MotionVector], fold: usize, test: &[usize], train: &[usize]) -> Result<()> {
    let test_groups: BTreeSet<String> = test.iter().map(|&i| vectors[i].group_key()).collect();
    match train.iter().map(|&i| vectors[i].group_key()).find(|g| test_groups.contains(g)) {
        Some(group) => Err(Error::Leakage { fold, group }),
        None => Ok(()),
    }
}

/// Train/test index lists for each fold.
pub fn fold_splits(vectors: &[MotionVector], seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let folds = make_folds(vectors, DEFAULT_FOLDS, seed::derive(seed, "folds", 0))?;
    let mut fold_of = vec![0; vectors.len()];
    for (f, members) in folds.iter().enumerate() {
        members.iter().for_each(|&i| fold_of[i] = f);
    }
    let mut splits = Vec::with_capacity(folds.len());
    for (f, test) in folds.into_iter().enumerate() {
        let train: Vec<usize> = (0..vectors.len()).filter(|&i| fold_of[i] != f).collect();
        check_no_leakage(vectors, f, &test, &train)?;
        splits.push((test, train));
    }
    Ok(splits)
}

/// Ten-fold cross-validation of one classifier on one movement's vectors.
/// Fold `f` trains with the seed derived from `seed`, the classifier's stage
/// tag and `f`.
pub fn cross_validate(
    vectors: &[MotionVector],
    classifier: ClassifierKind,
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<EvaluationReport> {
    let movement = vectors.first().map(|v| v.movement).ok_or(Error::TooFewSamples {
        needed: DEFAULT_FOLDS,
        actual: 0,
    })?;
    if let Some(v) = vectors.iter().find(|v| v.movement != movement) {
        return Err(Error::Data(format!("mixed movements {movement} and {}", v.movement)));
    }
    let splits = fold_splits(vectors, seed)?;
    let folds = splits
        .into_par_iter()
        .enumerate()
        .map(|(f, (test, train_idx))| {
            let data = TrainingSet::from_vectors(train_idx.iter().map(|&i| &vectors[i]))?;
            let model = train(classifier, &data, cfg, seed::derive(seed, classifier.seed_stage(), f as u64))?;
            let mut cm = ConfusionMatrix::default();
            for &i in &test {
                let p = model.predict(&vectors[i].values)?;
                cm.record(vectors[i].label.label(), p.label);
            }
            Ok(cm)
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled: ConfusionMatrix = folds.iter().copied().sum();
    let metrics = compute_metrics(&pooled)?;
    Ok(EvaluationReport { movement, classifier, folds, pooled, metrics })
}
