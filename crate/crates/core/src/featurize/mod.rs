//! Windowing and per-window feature extraction.
//!
//! Two feature methods share the same FFT front end:
//!
//! * method 1: per-channel log10 magnitudes of the 1..f_max Hz bins,
//!   flattened channel-major to `N * B` values;
//! * method 2: the 1..f_max Hz magnitude matrix is z-scored per frequency
//!   bucket across channels, turned into an N x N Pearson correlation
//!   matrix, and emitted as its strict upper triangle plus the N
//!   eigenvalues sorted by descending magnitude (`N(N-1)/2 + N` values).

mod cache;
mod features;
mod matrix;
mod pipeline;
mod window;

pub use cache::{montage_hash, read_cache, read_cache_expect, write_cache, CacheMeta};
pub use features::{feature_dim, method1_features, method2_features};
pub use matrix::{FeatureMatrix, FeatureRow};
pub use pipeline::{featurize_manifest, FeaturizeOptions, FeaturizeOutput, SkipRecord};
pub use window::{window_clip, window_count, Window};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Windowing parameters: window length and overlap, both in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Window length in seconds.
    pub w_l: f64,
    /// Overlap between consecutive windows in seconds.
    pub o: f64,
}

impl WindowSpec {
    pub fn new(w_l: f64, o: f64) -> Result<Self> {
        let spec = Self { w_l, o };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_l > 0.0) {
            return Err(Error::spec(
                "window spec",
                format!("W_l = {} must be > 0", self.w_l),
            ));
        }
        if !(self.o >= 0.0 && self.o < self.w_l) {
            return Err(Error::spec(
                "window spec",
                format!(
                    "overlap O = {} must satisfy 0 <= O < W_l = {}",
                    self.o, self.w_l
                ),
            ));
        }
        Ok(())
    }

    /// Hop between window starts in seconds.
    pub fn stride(&self) -> f64 {
        self.w_l - self.o
    }
}

/// Feature extraction method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Method {
    One,
    Two,
}

impl Method {
    pub fn as_u8(&self) -> u8 {
        match self {
            Method::One => 1,
            Method::Two => 2,
        }
    }
}

impl TryFrom<u8> for Method {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Method::One),
            2 => Ok(Method::Two),
            other => Err(format!("method must be 1 or 2, got {other}")),
        }
    }
}

impl From<Method> for u8 {
    fn from(m: Method) -> u8 {
        m.as_u8()
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Feature parameters: method, upper frequency bound and the log floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub method: Method,
    /// Upper frequency bound in Hz; bins cover `1 <= f < f_max`.
    pub f_max: f64,
    /// Magnitudes are clamped below at this value before log10 (method 1).
    pub log_floor: f64,
}

impl FeatureSpec {
    pub const DEFAULT_LOG_FLOOR: f64 = 1e-10;

    pub fn new(method: Method, f_max: f64) -> Result<Self> {
        let spec = Self {
            method,
            f_max,
            log_floor: Self::DEFAULT_LOG_FLOOR,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_max > 1.0) {
            return Err(Error::spec(
                "feature spec",
                format!("f_max = {} must be > 1", self.f_max),
            ));
        }
        if !(self.log_floor > 0.0) {
            return Err(Error::spec(
                "feature spec",
                format!("log floor = {} must be > 0", self.log_floor),
            ));
        }
        Ok(())
    }
}

/// Per-column standardization statistics fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Fit per-column mean and (population) standard deviation on `rows * d`
/// row-major data.
pub fn standardize_fit(x: &[f64], d: usize) -> Result<ColumnStats> {
    if d == 0 || x.is_empty() || !x.len().is_multiple_of(d) {
        return Err(Error::EmptyInput("standardize_fit training data"));
    }
    let rows = x.len() / d;
    let mut mean = vec![0.0; d];
    for r in 0..rows {
        for c in 0..d {
            mean[c] += x[r * d + c];
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }
    let mut var = vec![0.0; d];
    for r in 0..rows {
        for c in 0..d {
            let diff = x[r * d + c] - mean[c];
            var[c] += diff * diff;
        }
    }
    let std = var.iter().map(|v| (v / rows as f64).sqrt()).collect();
    Ok(ColumnStats { mean, std })
}

/// Apply fitted statistics in place; zero-variance columns map to 0.
pub fn standardize_apply(stats: &ColumnStats, x: &mut [f64]) {
    let d = stats.mean.len();
    debug_assert!(x.len().is_multiple_of(d));
    for row in x.chunks_mut(d) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = if stats.std[c] > 0.0 {
                (*v - stats.mean[c]) / stats.std[c]
            } else {
                0.0
            };
        }
    }
}
