//! Run configuration: JSON file plus command-line overrides.
//!
//! Precedence is defaults < config file < flags; the resolved configuration
//! is echoed into the output directory of every command.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use szclass_core::classifiers::{ClassifierKind, GbtConfig, KnnConfig, SgdConfig};
use szclass_core::error::{Error, Result};
use szclass_core::evaluation::CvMode;
use szclass_core::featurize::{FeatureSpec, Method, WindowSpec};

fn default_target_fs() -> f64 {
    250.0
}
fn default_method() -> u8 {
    1
}
fn default_f_max() -> f64 {
    48.0
}
fn default_w_l() -> f64 {
    1.0
}
fn default_overlap() -> f64 {
    0.75
}
fn default_log_floor() -> f64 {
    FeatureSpec::DEFAULT_LOG_FLOOR
}
fn default_true() -> bool {
    true
}
fn default_classifiers() -> Vec<String> {
    vec!["knn".into()]
}
fn default_cv() -> String {
    "seizure".into()
}
fn default_seed() -> u64 {
    42
}
fn default_budget() -> usize {
    100
}
fn default_search_eval() -> String {
    "first-fold".into()
}
fn default_sweep_methods() -> Vec<u8> {
    vec![1, 2]
}
fn default_sweep_classifiers() -> Vec<String> {
    vec!["knn".into(), "sgd".into()]
}
fn default_top_n() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Ordered channel labels; derived from the first data file when absent.
    #[serde(default)]
    pub montage: Option<Vec<String>>,
    #[serde(default = "default_target_fs")]
    pub target_fs: f64,
    #[serde(default = "default_method")]
    pub method: u8,
    #[serde(default = "default_f_max")]
    pub f_max: f64,
    #[serde(default = "default_w_l")]
    pub w_l: f64,
    /// Overlap as a fraction of the window length.
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    #[serde(default = "default_log_floor")]
    pub log_floor: f64,
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<String>,
    #[serde(default)]
    pub knn: KnnConfig,
    #[serde(default)]
    pub sgd: SgdConfig,
    #[serde(default)]
    pub gbt: GbtConfig,
    #[serde(default = "default_cv")]
    pub cv: String,
    #[serde(default)]
    pub folds: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_budget")]
    pub search_budget: usize,
    /// `cv` only: search hyperparameters per cell before the full CV.
    #[serde(default)]
    pub tune: bool,
    /// "first-fold" or "cv": what a search trial is scored on.
    #[serde(default = "default_search_eval")]
    pub search_eval: String,
    #[serde(default = "default_sweep_methods")]
    pub sweep_methods: Vec<u8>,
    #[serde(default = "default_sweep_classifiers")]
    pub sweep_classifiers: Vec<String>,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are complete")
    }
}

impl RunConfig {
    pub fn load(path: &PathBuf) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::InvalidSpec {
            what: "config file",
            msg: format!("{}: {e}", path.display()),
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::InvalidSpec {
            what: "config",
            msg,
        };
        self.method()?;
        self.cv_mode()?;
        if !(self.f_max > 1.0) {
            return Err(bad(format!("f_max = {} must be > 1", self.f_max)));
        }
        if !(self.w_l > 0.0) {
            return Err(bad(format!("w_l = {} must be > 0", self.w_l)));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(bad(format!(
                "overlap = {} must be a fraction in [0, 1)",
                self.overlap
            )));
        }
        if !(self.target_fs > 0.0) {
            return Err(bad(format!("target_fs = {} must be > 0", self.target_fs)));
        }
        if self.classifiers.is_empty() {
            return Err(bad("classifiers list is empty".into()));
        }
        for c in &self.classifiers {
            ClassifierKind::parse(c)?;
        }
        for c in &self.sweep_classifiers {
            ClassifierKind::parse(c)?;
        }
        for m in &self.sweep_methods {
            Method::try_from(*m).map_err(&bad)?;
        }
        if let Some(folds) = self.folds {
            if folds < 2 {
                return Err(bad(format!("folds = {folds} must be >= 2")));
            }
        }
        if self.search_eval != "first-fold" && self.search_eval != "cv" {
            return Err(bad(format!(
                "search_eval = {:?} must be \"first-fold\" or \"cv\"",
                self.search_eval
            )));
        }
        Ok(())
    }

    pub fn method(&self) -> Result<Method> {
        Method::try_from(self.method).map_err(|e| Error::InvalidSpec {
            what: "config",
            msg: e,
        })
    }

    pub fn cv_mode(&self) -> Result<CvMode> {
        CvMode::parse(&self.cv)
    }

    pub fn fold_count(&self) -> Result<usize> {
        Ok(self.folds.unwrap_or(self.cv_mode()?.default_folds()))
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        WindowSpec::new(self.w_l, self.overlap * self.w_l)
    }

    pub fn feature_spec(&self) -> Result<FeatureSpec> {
        let mut spec = FeatureSpec::new(self.method()?, self.f_max)?;
        spec.log_floor = self.log_floor;
        spec.validate()?;
        Ok(spec)
    }

    pub fn classifier_kinds(&self) -> Result<Vec<ClassifierKind>> {
        self.classifiers
            .iter()
            .map(|c| ClassifierKind::parse(c))
            .collect()
    }

    /// Fixed hyperparameters for one classifier kind, from the config file.
    pub fn fixed_config(
        &self,
        kind: ClassifierKind,
    ) -> szclass_core::classifiers::ClassifierConfig {
        use szclass_core::classifiers::ClassifierConfig;
        match kind {
            ClassifierKind::Knn => ClassifierConfig::Knn(self.knn.clone()),
            ClassifierKind::Sgd => ClassifierConfig::Sgd(self.sgd.clone()),
            ClassifierKind::Gbt => ClassifierConfig::Gbt(self.gbt.clone()),
        }
    }
}
