use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts with Young (label 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u8, u8)>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (truth, predicted) in pairs {
            cm.record(truth, predicted);
        }
        cm
    }

    pub fn record(&mut self, truth: u8, predicted: u8) {
        match (truth == 1, predicted == 1) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Predicted and actual roles exchanged.
    pub fn transposed(&self) -> Self {
        ConfusionMatrix::new(self.tp, self.fn_, self.tn, self.fp)
    }

    /// Positive and negative classes exchanged.
    pub fn class_swapped(&self) -> Self {
        ConfusionMatrix::new(self.tn, self.fn_, self.tp, self.fp)
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp + o.tp, self.fp + o.fp, self.tn + o.tn, self.fn_ + o.fn_)
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = ConfusionMatrix>>(iter: I) -> Self {
        iter.fold(ConfusionMatrix::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricName {
    Precision,
    Recall,
    F1,
    Mcc,
}

impl MetricName {
    pub fn name(self) -> &'static str {
        match self {
            MetricName::Precision => "prec",
            MetricName::Recall => "recall",
            MetricName::F1 => "f1",
            MetricName::Mcc => "mcc",
        }
    }
}

/// The five scores. Any ratio with a zero denominator is reported as 0 and
/// listed in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub prec: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub undefined: Vec<MetricName>,
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let (tp, fp, tn, fn_) = (cm.tp as f64, cm.fp as f64, cm.tn as f64, cm.fn_ as f64);
    let mut undefined = Vec::new();
    let mut ratio = |num: f64, den: f64, name: MetricName| {
        if den == 0.0 {
            undefined.push(name);
            0.0
        } else {
            num / den
        }
    };
    let prec = ratio(tp, tp + fp, MetricName::Precision);
    let recall = ratio(tp, tp + fn_, MetricName::Recall);
    let f1 = ratio(2.0 * prec * recall, prec + recall, MetricName::F1);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let mcc = ratio(tp * tn - fp * fn_, den, MetricName::Mcc).clamp(-1.0, 1.0);
    Ok(Metrics {
        acc: (tp + tn) / cm.total() as f64,
        prec,
        recall,
        f1,
        mcc,
        undefined,
    })
}
