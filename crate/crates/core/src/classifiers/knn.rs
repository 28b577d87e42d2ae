//! k-nearest-neighbor classifier (Euclidean distance).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::Dataset;
use crate::error::{Error, Result};
use crate::NUM_CLASSES;

/// Neighbor vote weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoteMode {
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
    pub vote: VoteMode,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 5,
            vote: VoteMode::Uniform,
        }
    }
}

/// The training set is the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    d: usize,
    x: Vec<f64>,
    y: Vec<u8>,
    k: usize,
    vote: VoteMode,
}

impl KnnModel {
    pub fn dim(&self) -> usize {
        self.d
    }
}

pub fn knn_fit(dataset: &Dataset, config: &KnnConfig) -> Result<KnnModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("knn training set"));
    }
    if config.k == 0 || config.k > dataset.len() {
        return Err(Error::spec(
            "knn config",
            format!("k = {} must be in 1..={}", config.k, dataset.len()),
        ));
    }
    Ok(KnnModel {
        d: dataset.dim(),
        x: dataset.features().to_vec(),
        y: dataset.labels().to_vec(),
        k: config.k,
        vote: config.vote,
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn predict_one(model: &KnnModel, query: &[f64]) -> u8 {
    let n = model.y.len();
    // (distance^2, training index); index tiebreak keeps ordering total.
    let mut dists: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            (
                squared_distance(query, &model.x[i * model.d..(i + 1) * model.d]),
                i,
            )
        })
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let neighbors = &dists[..model.k];

    let mut votes = [0.0f64; NUM_CLASSES];
    for &(d2, i) in neighbors {
        let w = match model.vote {
            VoteMode::Uniform => 1.0,
            // Guard keeps an exact hit from dividing by zero while still
            // dominating the vote.
            VoteMode::InverseDistance => 1.0 / d2.sqrt().max(1e-12),
        };
        votes[model.y[i] as usize] += w;
    }

    let top = votes.iter().cloned().fold(0.0f64, f64::max);
    let tied: Vec<u8> = (0..NUM_CLASSES as u8)
        .filter(|&c| votes[c as usize] == top)
        .collect();
    if tied.len() == 1 {
        return tied[0];
    }
    // Tie-break: the tied class owning the nearest neighbor wins; residual
    // ties fall to the lowest class id (neighbors are distance-ordered, and
    // `tied` is ascending, so the first match is both).
    for &(_, i) in neighbors {
        if tied.contains(&model.y[i]) {
            return model.y[i];
        }
    }
    tied[0]
}

pub fn knn_predict(model: &KnnModel, x: &[f64]) -> Result<Vec<u8>> {
    if !x.len().is_multiple_of(model.d) {
        return Err(Error::DimensionMismatch {
            expected: model.d,
            got: x.len() % model.d,
        });
    }
    Ok(x.par_chunks(model.d)
        .map(|q| predict_one(model, q))
        .collect())
}
