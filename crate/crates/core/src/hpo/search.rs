//! Budgeted random search with a full trial log.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hpo::space::{SearchSpace, TrialParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed { reason: String },
}

/// One evaluated sample of the search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    #[serde(rename = "config")]
    pub params: TrialParams,
    /// Weighted F1 of the evaluated configuration; absent if it failed.
    pub objective: Option<f64>,
    #[serde(flatten)]
    pub status: TrialStatus,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub trials: Vec<Trial>,
    pub best_index: usize,
    pub budget: usize,
    pub seed: u64,
    pub sampler: String,
}

impl SearchResult {
    pub fn best(&self) -> &Trial {
        &self.trials[self.best_index]
    }
}

/// Evaluate `budget` independent seeded samples of `space` and return every
/// trial plus the argmax.
///
/// All trial configurations are pre-generated from the seed, so worker
/// parallelism cannot change what gets evaluated. A failing objective marks
/// its trial failed and the search continues; ties on the objective go to
/// the earliest trial. The budget counts attempts, not successes.
pub fn random_search<F>(
    space: &SearchSpace,
    objective: F,
    budget: usize,
    seed: u64,
) -> Result<SearchResult>
where
    F: Fn(usize, &TrialParams) -> Result<f64> + Sync,
{
    if budget == 0 {
        return Err(Error::spec(
            "search budget",
            "budget must be >= 1".to_string(),
        ));
    }

    let configs: Vec<TrialParams> = (0..budget).map(|i| space.sample(seed, i as u64)).collect();

    let trials: Vec<Trial> = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, params)| {
            let start = std::time::Instant::now();
            let outcome = objective(index, &params);
            let duration_s = start.elapsed().as_secs_f64();
            match outcome {
                Ok(value) => Trial {
                    index,
                    params,
                    objective: Some(value),
                    status: TrialStatus::Ok,
                    duration_s,
                },
                Err(e) => Trial {
                    index,
                    params,
                    objective: None,
                    status: TrialStatus::Failed {
                        reason: e.to_string(),
                    },
                    duration_s,
                },
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    let mut last_reason = String::new();
    for t in &trials {
        match (&t.status, t.objective) {
            (TrialStatus::Ok, Some(v)) => {
                let better = match best {
                    None => true,
                    Some((_, bv)) => v > bv,
                };
                if better {
                    best = Some((t.index, v));
                }
            }
            (TrialStatus::Failed { reason }, _) => last_reason = reason.clone(),
            _ => {}
        }
    }

    let best_index = best.map(|(i, _)| i).ok_or(Error::AllTrialsFailed {
        budget,
        last_reason,
    })?;

    Ok(SearchResult {
        trials,
        best_index,
        budget,
        seed,
        sampler: "random-v1".to_string(),
    })
}
