//! From-scratch multi-class classifiers behind one train/predict contract.
//!
//! Three families: k-nearest neighbors, an SGD-trained multinomial logistic
//! model, and gradient-boosted regression trees with exact greedy splits.
//! All fits are deterministic given (dataset, config, seed); models are
//! immutable after fit and safe to share for concurrent prediction.

mod gbt;
mod knn;
mod sgd;

pub use gbt::{gbt_fit, gbt_predict, GbtConfig, GbtModel};
pub use knn::{knn_fit, knn_predict, KnnConfig, KnnModel, VoteMode};
pub use sgd::{sgd_fit, sgd_loss_and_grad, sgd_predict, LinearModel, LrSchedule, SgdConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::NUM_CLASSES;

/// Training data: row-major features plus class ids in 0..7.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    x: Vec<f64>,
    y: Vec<u8>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<u8>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::spec("dataset", "feature dimension is 0".to_string()));
        }
        if x.len() != y.len() * d {
            return Err(Error::DimensionMismatch {
                expected: y.len() * d,
                got: x.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&c| c as usize >= NUM_CLASSES) {
            return Err(Error::spec(
                "dataset",
                format!("class id {bad} out of range"),
            ));
        }
        Ok(Self { d, x, y })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn features(&self) -> &[f64] {
        &self.x
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    /// Per-class sample counts.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for &c in &self.y {
            counts[c as usize] += 1;
        }
        counts
    }
}

/// Hyperparameters for any of the three classifier kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Knn(KnnConfig),
    Sgd(SgdConfig),
    Gbt(GbtConfig),
}

impl ClassifierConfig {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierConfig::Knn(_) => ClassifierKind::Knn,
            ClassifierConfig::Sgd(_) => ClassifierKind::Sgd,
            ClassifierConfig::Gbt(_) => ClassifierKind::Gbt,
        }
    }
}

/// Classifier family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Sgd,
    Gbt,
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Sgd => "sgd",
            ClassifierKind::Gbt => "gbt",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "sgd" => Ok(ClassifierKind::Sgd),
            "gbt" => Ok(ClassifierKind::Gbt),
            other => Err(Error::spec(
                "classifier kind",
                format!("{other:?} is not one of knn, sgd, gbt"),
            )),
        }
    }

    /// Sensible fixed hyperparameters for runs without a search.
    pub fn default_config(&self) -> ClassifierConfig {
        match self {
            ClassifierKind::Knn => ClassifierConfig::Knn(KnnConfig::default()),
            ClassifierKind::Sgd => ClassifierConfig::Sgd(SgdConfig::default()),
            ClassifierKind::Gbt => ClassifierConfig::Gbt(GbtConfig::default()),
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A trained model of any kind; serializes as a tagged JSON document with
/// flat parameter arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Knn(KnnModel),
    Sgd(LinearModel),
    Gbt(GbtModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Knn(m) => m.dim(),
            Model::Sgd(m) => m.dim(),
            Model::Gbt(m) => m.dim(),
        }
    }
}

/// Train the classifier described by `config`.
pub fn fit(dataset: &Dataset, config: &ClassifierConfig, seed: u64) -> Result<Model> {
    match config {
        ClassifierConfig::Knn(c) => knn_fit(dataset, c).map(Model::Knn),
        ClassifierConfig::Sgd(c) => sgd_fit(dataset, c, seed).map(Model::Sgd),
        ClassifierConfig::Gbt(c) => gbt_fit(dataset, c, seed).map(Model::Gbt),
    }
}

/// Uniform prediction facade: dispatches to the matching predictor.
///
/// `x` is row-major with `d` columns; the output has one class id per row.
pub fn predict_labels(model: &Model, x: &[f64], d: usize) -> Result<Vec<u8>> {
    if d != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: d,
        });
    }
    if !x.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: (x.len() / d + 1) * d,
            got: x.len(),
        });
    }
    match model {
        Model::Knn(m) => knn_predict(m, x),
        Model::Sgd(m) => sgd_predict(m, x),
        Model::Gbt(m) => gbt_predict(m, x),
    }
}

/// Numerically stable softmax over one logit row, in place.
pub(crate) fn softmax_inplace(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
