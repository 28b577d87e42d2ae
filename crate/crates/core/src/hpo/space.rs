//! Search spaces and deterministic per-trial sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    ClassifierConfig, ClassifierKind, GbtConfig, KnnConfig, LrSchedule, SgdConfig, VoteMode,
};
use crate::derive_seed;
use crate::error::{Error, Result};

/// One search dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Dimension {
    /// Inclusive integer range.
    Int {
        lo: i64,
        hi: i64,
    },
    /// Real range, sampled uniformly on a linear or log10 scale.
    Real {
        lo: f64,
        hi: f64,
        log: bool,
    },
    Categorical {
        options: Vec<String>,
    },
}

impl Dimension {
    fn validate(&self, name: &str) -> Result<()> {
        let bad = |msg: String| Error::spec("search space", msg);
        match self {
            Dimension::Int { lo, hi } => {
                if lo > hi {
                    return Err(bad(format!("{name}: empty integer range [{lo}, {hi}]")));
                }
            }
            Dimension::Real { lo, hi, log } => {
                if !(lo < hi) {
                    return Err(bad(format!("{name}: empty real range [{lo}, {hi}]")));
                }
                if *log && !(*lo > 0.0) {
                    return Err(bad(format!(
                        "{name}: log-scale lower bound {lo} must be > 0"
                    )));
                }
            }
            Dimension::Categorical { options } => {
                if options.is_empty() {
                    return Err(bad(format!("{name}: no categories")));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ParamValue {
        match self {
            Dimension::Int { lo, hi } => ParamValue::Int(rng.gen_range(*lo..=*hi)),
            Dimension::Real { lo, hi, log } => {
                let v = if *log {
                    10f64.powf(rng.gen_range(lo.log10()..hi.log10()))
                } else {
                    rng.gen_range(*lo..*hi)
                };
                ParamValue::Real(v)
            }
            Dimension::Categorical { options } => {
                ParamValue::Cat(options[rng.gen_range(0..options.len())].clone())
            }
        }
    }
}

/// Sampled value of one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl ParamValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }
    pub fn as_real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(v) => Some(v),
            _ => None,
        }
    }
}

/// Named parameters of one trial. BTreeMap keeps serialization stable.
pub type TrialParams = BTreeMap<String, ParamValue>;

/// An ordered set of named dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub name: String,
    pub dims: Vec<(String, Dimension)>,
}

impl SearchSpace {
    pub fn new(name: impl Into<String>, dims: Vec<(String, Dimension)>) -> Result<Self> {
        for (dim_name, dim) in &dims {
            dim.validate(dim_name)?;
        }
        Ok(Self {
            name: name.into(),
            dims,
        })
    }

    /// Trial `index`'s parameters depend only on (space, seed, index).
    pub fn sample(&self, seed: u64, index: u64) -> TrialParams {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index));
        self.dims
            .iter()
            .map(|(name, dim)| (name.clone(), dim.sample(&mut rng)))
            .collect()
    }
}

/// The artifact-defined default space per classifier kind.
pub fn default_space(kind: ClassifierKind) -> SearchSpace {
    let dims = match kind {
        ClassifierKind::Knn => vec![
            ("k".to_string(), Dimension::Int { lo: 1, hi: 30 }),
            (
                "vote".to_string(),
                Dimension::Categorical {
                    options: vec!["uniform".into(), "inverse-distance".into()],
                },
            ),
        ],
        ClassifierKind::Sgd => vec![
            (
                "alpha".to_string(),
                Dimension::Real {
                    lo: 1e-7,
                    hi: 1e-1,
                    log: true,
                },
            ),
            (
                "lr0".to_string(),
                Dimension::Real {
                    lo: 1e-4,
                    hi: 1e0,
                    log: true,
                },
            ),
            (
                "schedule".to_string(),
                Dimension::Categorical {
                    options: vec!["constant".into(), "inv-scaling".into()],
                },
            ),
            ("epochs".to_string(), Dimension::Int { lo: 5, hi: 50 }),
        ],
        ClassifierKind::Gbt => vec![
            ("rounds".to_string(), Dimension::Int { lo: 20, hi: 300 }),
            ("depth".to_string(), Dimension::Int { lo: 2, hi: 8 }),
            (
                "eta".to_string(),
                Dimension::Real {
                    lo: 0.01,
                    hi: 0.5,
                    log: true,
                },
            ),
            ("min_leaf".to_string(), Dimension::Int { lo: 1, hi: 20 }),
        ],
    };
    SearchSpace::new(kind.name(), dims).expect("default spaces are valid")
}

/// Build a concrete classifier config from sampled parameters.
pub fn config_from_params(kind: ClassifierKind, params: &TrialParams) -> Result<ClassifierConfig> {
    let missing = |name: &str| Error::spec("trial params", format!("missing dimension {name:?}"));
    let int = |name: &str| -> Result<i64> {
        params
            .get(name)
            .and_then(ParamValue::as_int)
            .ok_or_else(|| missing(name))
    };
    let real = |name: &str| -> Result<f64> {
        params
            .get(name)
            .and_then(ParamValue::as_real)
            .ok_or_else(|| missing(name))
    };
    let cat = |name: &str| -> Result<&str> {
        params
            .get(name)
            .and_then(ParamValue::as_str)
            .ok_or_else(|| missing(name))
    };

    Ok(match kind {
        ClassifierKind::Knn => ClassifierConfig::Knn(KnnConfig {
            k: int("k")? as usize,
            vote: match cat("vote")? {
                "uniform" => VoteMode::Uniform,
                "inverse-distance" => VoteMode::InverseDistance,
                other => {
                    return Err(Error::spec(
                        "trial params",
                        format!("unknown vote {other:?}"),
                    ))
                }
            },
        }),
        ClassifierKind::Sgd => ClassifierConfig::Sgd(SgdConfig {
            alpha: real("alpha")?,
            lr0: real("lr0")?,
            schedule: match cat("schedule")? {
                "constant" => LrSchedule::Constant,
                "inv-scaling" => LrSchedule::InvScaling,
                other => {
                    return Err(Error::spec(
                        "trial params",
                        format!("unknown schedule {other:?}"),
                    ))
                }
            },
            epochs: int("epochs")? as usize,
        }),
        ClassifierKind::Gbt => ClassifierConfig::Gbt(GbtConfig {
            rounds: int("rounds")? as usize,
            depth: int("depth")? as usize,
            eta: real("eta")?,
            min_leaf: int("min_leaf")? as usize,
            algorithm: "gbt-exact".into(),
        }),
    })
}
