//! Multinomial logistic regression trained by stochastic gradient descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{argmax, softmax_inplace, Dataset};
use crate::error::{Error, Result};
use crate::NUM_CLASSES;

/// Learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LrSchedule {
    /// `lr_t = lr0`
    Constant,
    /// `lr_t = lr0 / (1 + lr0 * alpha * t)` with `t` the global step count.
    InvScaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    /// L2 regularization strength.
    pub alpha: f64,
    /// Initial learning rate.
    pub lr0: f64,
    pub schedule: LrSchedule,
    pub epochs: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-4,
            lr0: 0.05,
            schedule: LrSchedule::Constant,
            epochs: 20,
        }
    }
}

/// Trained linear model: one weight row and bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    d: usize,
    /// Row-major `NUM_CLASSES x d` weights.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub config: SgdConfig,
    pub seed: u64,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.d
    }

    fn logits(&self, x: &[f64], out: &mut [f64]) {
        for (c, slot) in out.iter_mut().enumerate() {
            let w = &self.weights[c * self.d..(c + 1) * self.d];
            *slot = self.bias[c] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// L2 norm of the weight matrix.
    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Regularized mean cross-entropy and its analytic gradient at `(w, b)`.
///
/// `J = (1/m) sum_i -log p_{y_i} + (alpha/2) ||W||^2`; the bias is not
/// regularized. Exposed so the gradient can be verified against finite
/// differences.
pub fn sgd_loss_and_grad(
    w: &[f64],
    b: &[f64],
    dataset: &Dataset,
    alpha: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let d = dataset.dim();
    let m = dataset.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; NUM_CLASSES * d];
    let mut grad_b = vec![0.0; NUM_CLASSES];
    let mut p = vec![0.0; NUM_CLASSES];

    for i in 0..dataset.len() {
        let x = dataset.row(i);
        let y = dataset.labels()[i] as usize;
        for (c, pv) in p.iter_mut().enumerate() {
            let wc = &w[c * d..(c + 1) * d];
            *pv = b[c] + wc.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        }
        softmax_inplace(&mut p);
        loss -= p[y].max(1e-300).ln();
        for c in 0..NUM_CLASSES {
            let err = p[c] - if c == y { 1.0 } else { 0.0 };
            grad_b[c] += err;
            for (g, v) in grad_w[c * d..(c + 1) * d].iter_mut().zip(x) {
                *g += err * v;
            }
        }
    }

    loss /= m;
    for g in grad_w.iter_mut() {
        *g /= m;
    }
    for g in grad_b.iter_mut() {
        *g /= m;
    }
    for (g, wi) in grad_w.iter_mut().zip(w) {
        *g += alpha * wi;
    }
    loss += 0.5 * alpha * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Fit by per-sample gradient steps over seeded shuffled epochs.
pub fn sgd_fit(dataset: &Dataset, config: &SgdConfig, seed: u64) -> Result<LinearModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("sgd training set"));
    }
    if config.epochs == 0 {
        return Err(Error::spec("sgd config", "epochs must be >= 1".to_string()));
    }
    if !(config.alpha >= 0.0) {
        return Err(Error::spec(
            "sgd config",
            format!("alpha = {} must be >= 0", config.alpha),
        ));
    }
    if !(config.lr0 > 0.0) {
        return Err(Error::spec(
            "sgd config",
            format!("lr0 = {} must be > 0", config.lr0),
        ));
    }

    let d = dataset.dim();
    let mut w = vec![0.0f64; NUM_CLASSES * d];
    let mut b = vec![0.0f64; NUM_CLASSES];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut p = vec![0.0f64; NUM_CLASSES];
    let mut step: u64 = 0;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let lr = match config.schedule {
                LrSchedule::Constant => config.lr0,
                LrSchedule::InvScaling => {
                    config.lr0 / (1.0 + config.lr0 * config.alpha * step as f64)
                }
            };
            let x = dataset.row(i);
            let y = dataset.labels()[i] as usize;
            for c in 0..NUM_CLASSES {
                let wc = &w[c * d..(c + 1) * d];
                p[c] = b[c] + wc.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
            }
            softmax_inplace(&mut p);
            for c in 0..NUM_CLASSES {
                let err = p[c] - if c == y { 1.0 } else { 0.0 };
                b[c] -= lr * err;
                let wc = &mut w[c * d..(c + 1) * d];
                for (wv, xv) in wc.iter_mut().zip(x) {
                    *wv -= lr * (err * xv + config.alpha * *wv);
                }
            }
            step += 1;
        }

        let finite = w.iter().chain(b.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Divergence { epoch });
        }
    }

    Ok(LinearModel {
        d,
        weights: w,
        bias: b,
        config: config.clone(),
        seed,
    })
}

pub fn sgd_predict(model: &LinearModel, x: &[f64]) -> Result<Vec<u8>> {
    if !x.len().is_multiple_of(model.d) {
        return Err(Error::DimensionMismatch {
            expected: model.d,
            got: x.len() % model.d,
        });
    }
    let mut logits = vec![0.0; NUM_CLASSES];
    Ok(x.chunks(model.d)
        .map(|row| {
            model.logits(row, &mut logits);
            argmax(&logits) as u8
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Two well-separated uniform blobs, `n` samples per class.
    fn blobs(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            x.push(rng.gen_range(-0.5..0.5));
            x.push(rng.gen_range(-0.5..0.5));
            y.push(0u8);
            x.push(6.0 + rng.gen_range(-0.5..0.5));
            x.push(6.0 + rng.gen_range(-0.5..0.5));
            y.push(1u8);
        }
        Dataset::new(x, y, 2).unwrap()
    }

    #[test]
    fn separable_blobs_reach_perfect_training_accuracy() {
        let data = blobs(100, 5);
        let config = SgdConfig {
            alpha: 1e-6,
            lr0: 0.1,
            schedule: LrSchedule::Constant,
            epochs: 50,
        };
        let model = sgd_fit(&data, &config, 13).unwrap();
        let preds = sgd_predict(&model, data.features()).unwrap();
        let correct = preds
            .iter()
            .zip(data.labels())
            .filter(|(a, b)| a == b)
            .count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn huge_alpha_collapses_weights() {
        let data = blobs(50, 8);
        let config = SgdConfig {
            alpha: 1e6,
            lr0: 0.1,
            schedule: LrSchedule::InvScaling,
            epochs: 10,
        };
        let model = sgd_fit(&data, &config, 3).unwrap();
        assert!(
            model.weight_norm() < 1e-2,
            "||W|| = {}",
            model.weight_norm()
        );
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let data = blobs(40, 2);
        let config = SgdConfig::default();
        let a = sgd_fit(&data, &config, 99).unwrap();
        let b = sgd_fit(&data, &config, 99).unwrap();
        assert_eq!(a, b);
        let c = sgd_fit(&data, &config, 100).unwrap();
        assert_ne!(a.weights, c.weights);
    }

    #[test]
    fn divergence_names_the_epoch() {
        let data = blobs(20, 1);
        let config = SgdConfig {
            alpha: 1.0,
            lr0: 1e20,
            schedule: LrSchedule::Constant,
            epochs: 5,
        };
        match sgd_fit(&data, &config, 0) {
            Err(Error::Divergence { epoch }) => assert!(epoch < 5),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = 3;
        let x: Vec<f64> = (0..5 * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<u8> = (0..5)
            .map(|_| rng.gen_range(0..NUM_CLASSES) as u8)
            .collect();
        let data = Dataset::new(x, y, d).unwrap();
        let alpha = 0.01;
        let eps = 1e-6;

        for _ in 0..20 {
            let w: Vec<f64> = (0..NUM_CLASSES * d)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let b: Vec<f64> = (0..NUM_CLASSES).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, grad_w, grad_b) = sgd_loss_and_grad(&w, &b, &data, alpha);

            for idx in 0..w.len() {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[idx] += eps;
                wm[idx] -= eps;
                let (lp, _, _) = sgd_loss_and_grad(&wp, &b, &data, alpha);
                let (lm, _, _) = sgd_loss_and_grad(&wm, &b, &data, alpha);
                let numeric = (lp - lm) / (2.0 * eps);
                let denom = numeric.abs().max(grad_w[idx].abs()).max(1e-8);
                assert!(
                    (numeric - grad_w[idx]).abs() / denom <= 1e-5,
                    "dW[{idx}]: analytic {} vs numeric {numeric}",
                    grad_w[idx]
                );
            }
            for idx in 0..b.len() {
                let mut bp = b.clone();
                let mut bm = b.clone();
                bp[idx] += eps;
                bm[idx] -= eps;
                let (lp, _, _) = sgd_loss_and_grad(&w, &bp, &data, alpha);
                let (lm, _, _) = sgd_loss_and_grad(&w, &bm, &data, alpha);
                let numeric = (lp - lm) / (2.0 * eps);
                let denom = numeric.abs().max(grad_b[idx].abs()).max(1e-8);
                assert!((numeric - grad_b[idx]).abs() / denom <= 1e-5);
            }
        }
    }
}
