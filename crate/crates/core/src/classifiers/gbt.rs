//! Gradient-boosted regression trees with a softmax objective.
//!
//! Plain gradient boosting: every round fits one exact-greedy regression
//! tree per class to the negative gradient (one-hot minus softmax
//! probability), with variance-reduction splits and mean-residual leaves.
//! The config records `algorithm: "gbt-exact"` to keep the distinction from
//! second-order/histogram boosters explicit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{argmax, softmax_inplace, Dataset};
use crate::error::{Error, Result};
use crate::NUM_CLASSES;

fn default_algorithm() -> String {
    "gbt-exact".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    /// Boosting rounds.
    pub rounds: usize,
    /// Maximum tree depth; 0 means a single leaf per tree.
    pub depth: usize,
    /// Shrinkage applied to every leaf score.
    pub eta: f64,
    /// Minimum samples per leaf.
    pub min_leaf: usize,
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            rounds: 50,
            depth: 3,
            eta: 0.1,
            min_leaf: 1,
            algorithm: default_algorithm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// One regression tree stored as a flat node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    d: usize,
    /// Log class priors; the round-0 scores.
    pub base_scores: Vec<f64>,
    pub eta: f64,
    /// `rounds[r][c]` is round r's tree for class c.
    pub rounds: Vec<Vec<Tree>>,
    /// Training multiclass log-loss after each round.
    pub train_loss: Vec<f64>,
    pub config: GbtConfig,
}

impl GbtModel {
    pub fn dim(&self) -> usize {
        self.d
    }

    fn raw_scores(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.base_scores);
        for round in &self.rounds {
            for (c, tree) in round.iter().enumerate() {
                out[c] += self.eta * tree.predict(x);
            }
        }
    }
}

/// Shared per-fit state: features are sorted once per column, then every
/// node scans the presorted order through a membership mask.
struct TreeBuilder<'a> {
    features: &'a [f64],
    d: usize,
    /// Per feature: dataset row indices sorted by value (ties by index).
    sorted: &'a [Vec<u32>],
    min_leaf: usize,
}

impl TreeBuilder<'_> {
    /// Best split of the masked node on one feature: (gain, threshold).
    ///
    /// Gain is the SSE reduction `sum_l^2/n_l + sum_r^2/n_r - sum^2/n`; only
    /// splits leaving `min_leaf` samples on each side qualify.
    fn best_split_on_feature(
        &self,
        feature: usize,
        in_node: &[bool],
        n_node: usize,
        total_sum: f64,
        targets: &[f64],
    ) -> Option<(f64, f64)> {
        let base = total_sum * total_sum / n_node as f64;
        let mut left_n = 0usize;
        let mut left_sum = 0.0;
        let mut prev_value = 0.0;
        let mut best: Option<(f64, f64)> = None;

        for &ri in &self.sorted[feature] {
            let i = ri as usize;
            if !in_node[i] {
                continue;
            }
            let value = self.features[i * self.d + feature];
            // A boundary only exists between distinct consecutive values.
            if left_n >= self.min_leaf && n_node - left_n >= self.min_leaf && value > prev_value {
                let right_sum = total_sum - left_sum;
                let gain = left_sum * left_sum / left_n as f64
                    + right_sum * right_sum / (n_node - left_n) as f64
                    - base;
                let threshold = 0.5 * (prev_value + value);
                // Thresholds arrive in ascending order, so first-wins keeps
                // the lowest threshold on gain ties.
                if best.is_none_or(|(g, _)| gain > g) {
                    best = Some((gain, threshold));
                }
            }
            left_sum += targets[i];
            left_n += 1;
            prev_value = value;
        }
        best
    }

    fn build_tree(&self, targets: &[f64], depth: usize, mask: &mut [bool]) -> Tree {
        let mut nodes = Vec::new();
        let all: Vec<usize> = (0..targets.len()).collect();
        self.build_node(&all, targets, depth, mask, &mut nodes);
        Tree { nodes }
    }

    fn build_node(
        &self,
        indices: &[usize],
        targets: &[f64],
        depth: usize,
        mask: &mut [bool],
        nodes: &mut Vec<Node>,
    ) -> usize {
        let n = indices.len();
        let sum: f64 = indices.iter().map(|&i| targets[i]).sum();
        let mean = sum / n as f64;

        let make_leaf = |nodes: &mut Vec<Node>| {
            nodes.push(Node::Leaf { value: mean });
            nodes.len() - 1
        };

        if depth == 0 || n < 2 * self.min_leaf.max(1) {
            return make_leaf(nodes);
        }

        for &i in indices {
            mask[i] = true;
        }
        // Deterministic parallel split search: ties resolved toward the
        // lowest feature index, then the lowest threshold.
        let best = (0..self.d)
            .into_par_iter()
            .filter_map(|f| {
                self.best_split_on_feature(f, mask, n, sum, targets)
                    .map(|(gain, thr)| (gain, f, thr))
            })
            .reduce_with(|a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1 < a.1 || (b.1 == a.1 && b.2 < a.2))) {
                    b
                } else {
                    a
                }
            });
        for &i in indices {
            mask[i] = false;
        }

        let (_gain, feature, threshold) = match best {
            Some(b) if b.0 > 1e-12 => b,
            _ => return make_leaf(nodes),
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.features[i * self.d + feature] <= threshold);

        let slot = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 }); // placeholder until children exist
        let left = self.build_node(&left_idx, targets, depth - 1, mask, nodes);
        let right = self.build_node(&right_idx, targets, depth - 1, mask, nodes);
        nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }
}

/// Fit a boosted softmax model. The `seed` parameter keeps the uniform
/// classifier signature; exact greedy boosting draws no random numbers.
pub fn gbt_fit(dataset: &Dataset, config: &GbtConfig, _seed: u64) -> Result<GbtModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("gbt training set"));
    }
    if config.rounds == 0 {
        return Err(Error::spec("gbt config", "rounds must be >= 1".to_string()));
    }
    if !(config.eta >= 0.0) || !config.eta.is_finite() {
        return Err(Error::spec(
            "gbt config",
            format!("eta = {} must be >= 0", config.eta),
        ));
    }
    if config.min_leaf == 0 {
        return Err(Error::spec(
            "gbt config",
            "min_leaf must be >= 1".to_string(),
        ));
    }

    let m = dataset.len();
    let d = dataset.dim();
    let counts = dataset.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() == 1 {
        log::warn!("gbt training set holds a single class; the model will be constant");
    }
    let base_scores: Vec<f64> = counts
        .iter()
        .map(|&c| ((c as f64 / m as f64).max(1e-12)).ln())
        .collect();

    let mut scores: Vec<f64> = Vec::with_capacity(m * NUM_CLASSES);
    for _ in 0..m {
        scores.extend_from_slice(&base_scores);
    }

    // Sort every feature column once; all trees scan these orders.
    let features = dataset.features();
    let sorted: Vec<Vec<u32>> = (0..d)
        .into_par_iter()
        .map(|f| {
            let mut idx: Vec<u32> = (0..m as u32).collect();
            idx.sort_by(|&a, &b| {
                features[a as usize * d + f]
                    .partial_cmp(&features[b as usize * d + f])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();
    let builder = TreeBuilder {
        features,
        d,
        sorted: &sorted,
        min_leaf: config.min_leaf,
    };

    let mut rounds = Vec::with_capacity(config.rounds);
    let mut train_loss = Vec::with_capacity(config.rounds);
    let mut probs = vec![0.0f64; NUM_CLASSES];
    let mut residuals = vec![vec![0.0f64; m]; NUM_CLASSES];
    let mut mask = vec![false; m];

    for _round in 0..config.rounds {
        for i in 0..m {
            probs.copy_from_slice(&scores[i * NUM_CLASSES..(i + 1) * NUM_CLASSES]);
            softmax_inplace(&mut probs);
            let y = dataset.labels()[i] as usize;
            for c in 0..NUM_CLASSES {
                residuals[c][i] = if c == y { 1.0 } else { 0.0 } - probs[c];
            }
        }

        let trees: Vec<Tree> = residuals
            .iter()
            .map(|r| builder.build_tree(r, config.depth, &mut mask))
            .collect();

        for i in 0..m {
            let x = dataset.row(i);
            for (c, tree) in trees.iter().enumerate() {
                scores[i * NUM_CLASSES + c] += config.eta * tree.predict(x);
            }
        }
        rounds.push(trees);

        let mut loss = 0.0;
        for i in 0..m {
            probs.copy_from_slice(&scores[i * NUM_CLASSES..(i + 1) * NUM_CLASSES]);
            softmax_inplace(&mut probs);
            loss -= probs[dataset.labels()[i] as usize].max(1e-300).ln();
        }
        train_loss.push(loss / m as f64);
    }

    Ok(GbtModel {
        d,
        base_scores,
        eta: config.eta,
        rounds,
        train_loss,
        config: config.clone(),
    })
}

pub fn gbt_predict(model: &GbtModel, x: &[f64]) -> Result<Vec<u8>> {
    if !x.len().is_multiple_of(model.d) {
        return Err(Error::DimensionMismatch {
            expected: model.d,
            got: x.len() % model.d,
        });
    }
    let mut scores = vec![0.0f64; NUM_CLASSES];
    Ok(x.chunks(model.d)
        .map(|row| {
            model.raw_scores(row, &mut scores);
            argmax(&scores) as u8
        })
        .collect())
}
