//! Manifest-to-features pipeline.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featurize::features::extract_features;
use crate::featurize::{window_clip, FeatureMatrix, FeatureSpec, WindowSpec};
use crate::ingest::{EdfFile, Manifest};

/// Knobs for [`featurize_manifest`].
#[derive(Debug, Clone)]
pub struct FeaturizeOptions {
    /// Common sampling rate every channel is resampled to.
    pub target_fs: f64,
    /// Base directory for relative manifest paths.
    pub data_root: Option<PathBuf>,
}

impl Default for FeaturizeOptions {
    fn default() -> Self {
        Self {
            target_fs: 250.0,
            data_root: None,
        }
    }
}

/// An event that produced no rows, and why.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SkipRecord {
    pub seizure_id: u32,
    pub file_path: String,
    pub reason: String,
}

pub struct FeaturizeOutput {
    pub features: FeatureMatrix,
    pub skipped: Vec<SkipRecord>,
}

/// Extract features for every manifest event.
///
/// Events are processed in parallel but reduced in manifest order, then
/// window order, so the output is deterministic. Events whose files are
/// unreadable, lack a montage channel, or are shorter than one window are
/// skipped and reported rather than failing the run.
pub fn featurize_manifest(
    manifest: &Manifest,
    montage: &[String],
    window: &WindowSpec,
    spec: &FeatureSpec,
    opts: &FeaturizeOptions,
) -> Result<FeaturizeOutput> {
    window.validate()?;
    spec.validate()?;
    if manifest.is_empty() {
        return Err(Error::EmptyInput("manifest"));
    }
    if montage.is_empty() {
        return Err(Error::EmptyInput("montage"));
    }

    let resolve = |p: &str| -> PathBuf {
        let path = Path::new(p);
        match (&opts.data_root, path.is_relative()) {
            (Some(root), true) => root.join(path),
            _ => path.to_path_buf(),
        }
    };

    // Per event: either feature rows (window start, vector) or a skip reason.
    type EventRows = std::result::Result<Vec<(f64, Vec<f64>)>, String>;
    let per_event: Vec<EventRows> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let event = &entry.event;
            let path = resolve(&entry.file_path);
            let edf = EdfFile::open(&path).map_err(|e| e.to_string())?;
            let clip = edf
                .read_channels(montage, event.start_s, event.stop_s, opts.target_fs)
                .map_err(|e| e.to_string())?;
            let windows = window_clip(&clip, window);
            if windows.is_empty() {
                return Err(format!(
                    "clip of {:.3} s is shorter than the {} s window",
                    clip.duration_s(),
                    window.w_l
                ));
            }
            windows
                .into_iter()
                .map(|w| {
                    extract_features(&w.samples, opts.target_fs, spec)
                        .map(|f| (event.start_s + w.start_s, f))
                        .map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();

    let mut features = FeatureMatrix::default();
    let mut skipped = Vec::new();
    let mut dim: Option<usize> = None;

    for (idx, (entry, rows)) in manifest.entries.iter().zip(per_event).enumerate() {
        let seizure_id = idx as u32;
        match rows {
            Err(reason) => {
                log::warn!(
                    "skipping event {seizure_id} ({}): {reason}",
                    entry.file_path
                );
                skipped.push(SkipRecord {
                    seizure_id,
                    file_path: entry.file_path.clone(),
                    reason,
                });
            }
            Ok(rows) => {
                for (start_s, vector) in rows {
                    if dim.is_none() {
                        dim = Some(vector.len());
                        features = FeatureMatrix::new(vector.len());
                    }
                    let patient = features.intern_patient(&entry.event.patient_id);
                    features.push_row(&vector, entry.event.ty, patient, seizure_id, start_s)?;
                }
            }
        }
    }

    if features.is_empty() {
        return Err(Error::EmptyInput("no windows produced from the manifest"));
    }
    Ok(FeaturizeOutput { features, skipped })
}
