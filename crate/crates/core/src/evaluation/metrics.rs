//! Confusion matrices and the weighted-F1 score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::NUM_CLASSES;

/// 7x7 confusion counts: rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_pairs(truth: &[u8], pred: &[u8]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                got: pred.len(),
            });
        }
        let mut cm = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(pred) {
            cm.add(t, p)?;
        }
        Ok(cm)
    }

    pub fn add(&mut self, truth: u8, pred: u8) -> Result<()> {
        if truth as usize >= NUM_CLASSES || pred as usize >= NUM_CLASSES {
            return Err(Error::spec(
                "confusion matrix",
                format!("class id out of range: true {truth}, predicted {pred}"),
            ));
        }
        self.counts[truth as usize][pred as usize] += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for t in 0..NUM_CLASSES {
            for p in 0..NUM_CLASSES {
                self.counts[t][p] += other.counts[t][p];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// True-class count (the support) of one class.
    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum()
    }

    /// Per-class precision/recall/F1/support, with the 0/0 -> 0 convention.
    pub fn per_class(&self) -> Vec<ClassMetrics> {
        (0..NUM_CLASSES)
            .map(|c| {
                let tp = self.counts[c][c] as f64;
                let support = self.support(c);
                let predicted = self.predicted(c);
                let precision = if predicted > 0 {
                    tp / predicted as f64
                } else {
                    0.0
                };
                let recall = if support > 0 {
                    tp / support as f64
                } else {
                    0.0
                };
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassMetrics {
                    class: c as u8,
                    precision,
                    recall,
                    f1,
                    support,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Support-weighted mean of per-class F1 scores.
pub fn weighted_f1(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("confusion matrix"));
    }
    let score = cm
        .per_class()
        .iter()
        .map(|m| m.support as f64 * m.f1)
        .sum::<f64>()
        / total as f64;
    Ok(score)
}
