//! The 50-point preprocessing grid sweep.

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierKind;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::featurize::Method;
use crate::hpo::search::{random_search, Trial};
use crate::hpo::space::{default_space, TrialParams};

pub const GRID_F_MAX: [f64; 5] = [12.0, 24.0, 48.0, 64.0, 96.0];
pub const GRID_W_L: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
pub const GRID_O_FRAC: [f64; 2] = [0.5, 0.75];

/// One preprocessing grid point; `o = o_frac * w_l` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub f_max: f64,
    pub w_l: f64,
    pub o_frac: f64,
}

impl GridPoint {
    pub fn overlap_s(&self) -> f64 {
        self.o_frac * self.w_l
    }
}

/// The full 50-point grid in deterministic order: f_max, then W_l, then the
/// overlap rule.
pub fn preproc_grid() -> Vec<GridPoint> {
    let mut grid = Vec::with_capacity(50);
    for &f_max in &GRID_F_MAX {
        for &w_l in &GRID_W_L {
            for &o_frac in &GRID_O_FRAC {
                grid.push(GridPoint { f_max, w_l, o_frac });
            }
        }
    }
    grid
}

/// One sweep table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub classifier: ClassifierKind,
    pub f_max: f64,
    pub w_l: f64,
    /// Overlap in seconds (always 0.5 or 0.75 of `w_l`).
    pub o: f64,
    pub weighted_f1: f64,
}

/// Trial log entry tagging each search trial with its grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTrial {
    pub method: Method,
    pub classifier: ClassifierKind,
    pub f_max: f64,
    pub w_l: f64,
    pub o: f64,
    #[serde(flatten)]
    pub trial: Trial,
}

/// Sweep the 50-point grid for every (method, classifier) pair.
///
/// For each grid point a budgeted random search over the classifier's
/// default space picks the best hyperparameters; `evaluate` scores one
/// (grid point, trial) candidate, conventionally on the first
/// cross-validation split only. Rows come back grouped per
/// (method, classifier) in deterministic grid order.
///
/// Evaluation visits one (method, grid point) at a time across all
/// classifiers, so callers can hold just the current point's features.
pub fn sweep_preproc_grid<F>(
    methods: &[Method],
    classifiers: &[ClassifierKind],
    budget: usize,
    seed: u64,
    evaluate: F,
) -> Result<(Vec<SweepRow>, Vec<SweepTrial>)>
where
    F: Fn(Method, ClassifierKind, &GridPoint, usize, &TrialParams) -> Result<f64> + Sync,
{
    if methods.is_empty() || classifiers.is_empty() {
        return Err(Error::EmptyInput("sweep methods/classifiers"));
    }
    let grid = preproc_grid();
    // Buckets indexed by (method, classifier), filled in grid order.
    let mut row_buckets: Vec<Vec<SweepRow>> = vec![Vec::new(); methods.len() * classifiers.len()];
    let mut log_buckets: Vec<Vec<SweepTrial>> = vec![Vec::new(); row_buckets.len()];

    for (mi, &method) in methods.iter().enumerate() {
        for (pi, point) in grid.iter().enumerate() {
            for (ci, &classifier) in classifiers.iter().enumerate() {
                // Seed depends only on the (method, classifier, point) cell,
                // not on evaluation order.
                let search_seed = derive_seed(
                    seed,
                    ((mi * classifiers.len() + ci) * grid.len() + pi) as u64,
                );
                let space = default_space(classifier);
                let result = random_search(
                    &space,
                    |trial_idx, params| evaluate(method, classifier, point, trial_idx, params),
                    budget,
                    search_seed,
                )?;
                let bucket = mi * classifiers.len() + ci;
                row_buckets[bucket].push(SweepRow {
                    method,
                    classifier,
                    f_max: point.f_max,
                    w_l: point.w_l,
                    o: point.overlap_s(),
                    weighted_f1: result.best().objective.expect("best trial succeeded"),
                });
                for trial in result.trials {
                    log_buckets[bucket].push(SweepTrial {
                        method,
                        classifier,
                        f_max: point.f_max,
                        w_l: point.w_l,
                        o: point.overlap_s(),
                        trial,
                    });
                }
            }
        }
    }
    Ok((
        row_buckets.into_iter().flatten().collect(),
        log_buckets.into_iter().flatten().collect(),
    ))
}

/// Top `n` grid points by score; ties resolve to the earlier row.
pub fn select_top_configs(rows: &[SweepRow], n: usize) -> Result<Vec<GridPoint>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("sweep table"));
    }
    if n > rows.len() {
        return Err(Error::spec(
            "top-config selection",
            format!("asked for {n} configs from {} rows", rows.len()),
        ));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        rows[b]
            .weighted_f1
            .partial_cmp(&rows[a].weighted_f1)
            .unwrap()
            .then(a.cmp(&b))
    });
    Ok(order[..n]
        .iter()
        .map(|&i| GridPoint {
            f_max: rows[i].f_max,
            w_l: rows[i].w_l,
            o_frac: rows[i].o / rows[i].w_l,
        })
        .collect())
}

/// CSV rendering of the sweep table: `method,classifier,f_max,W_l,O,weighted_f1`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("method,classifier,f_max,W_l,O,weighted_f1\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method, r.classifier, r.f_max, r.w_l, r.o, r.weighted_f1
        ));
    }
    out
}
