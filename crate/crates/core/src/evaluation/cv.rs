//! The cross-validation driver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifiers::{fit, predict_labels, ClassifierConfig};
use crate::error::{Error, Result};
use crate::evaluation::metrics::{weighted_f1, ClassMetrics, ConfusionMatrix};
use crate::evaluation::FoldAssignment;
use crate::featurize::{standardize_apply, standardize_fit, FeatureMatrix};
use crate::{derive_seed, NUM_CLASSES};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvOptions {
    /// Fit per-column scaling on the training split of every fold.
    pub standardize: bool,
    /// Root seed for per-fold model fits.
    pub seed: u64,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            standardize: true,
            seed: 0,
        }
    }
}

/// One fold's outcome. The evaluation unit is the window; a seizure-level
/// majority-vote score is reported alongside but never used for selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_windows: usize,
    pub test_windows: usize,
    pub weighted_f1: f64,
    pub seizure_weighted_f1: f64,
    pub confusion: ConfusionMatrix,
    /// Classes absent from this fold's training split.
    pub missing_train_classes: Vec<String>,
    /// (sum of means, sum of stds) of the fitted scaler; proves the
    /// statistics depend only on training rows.
    pub scaler_checksum: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: String,
    pub k: usize,
    pub fold_seed: u64,
    pub model_seed: u64,
    pub standardize: bool,
    pub classifier: ClassifierConfig,
    pub folds: Vec<FoldReport>,
    /// Unweighted mean of per-fold window-level weighted F1.
    pub mean_weighted_f1: f64,
    pub mean_seizure_weighted_f1: f64,
    /// Per-class metrics over the pooled confusion matrix.
    pub per_class: Vec<ClassMetrics>,
    pub pooled_confusion: ConfusionMatrix,
    /// Echo of the featurization that produced the inputs, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_echo: Option<serde_json::Value>,
}

/// Window row indices per fold; errors if any fold holds no windows.
fn rows_per_fold(features: &FeatureMatrix, assignment: &FoldAssignment) -> Result<Vec<Vec<usize>>> {
    let mut fold_rows: Vec<Vec<usize>> = vec![Vec::new(); assignment.k];
    for row in 0..features.num_rows() {
        let seizure = features.row(row).seizure_id;
        let fold = assignment.fold(seizure).ok_or_else(|| {
            Error::spec(
                "fold assignment",
                format!("seizure id {seizure} has no fold"),
            )
        })?;
        fold_rows[fold as usize].push(row);
    }
    if let Some(fold) = fold_rows.iter().position(Vec::is_empty) {
        return Err(Error::EmptyFold { fold });
    }
    Ok(fold_rows)
}

fn eval_fold(
    features: &FeatureMatrix,
    fold_rows: &[Vec<usize>],
    fold: usize,
    config: &ClassifierConfig,
    opts: &CvOptions,
) -> Result<FoldReport> {
    let d = features.dim();
    let test_rows = &fold_rows[fold];
    let train_rows: Vec<usize> = (0..fold_rows.len())
        .filter(|f| *f != fold)
        .flat_map(|f| fold_rows[f].iter().copied())
        .collect();

    let gather = |rows: &[usize]| -> (Vec<f64>, Vec<u8>) {
        let mut x = Vec::with_capacity(rows.len() * d);
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            x.extend_from_slice(features.row_features(r));
            y.push(features.row(r).label.class_id());
        }
        (x, y)
    };
    let (mut train_x, train_y) = gather(&train_rows);
    let (mut test_x, test_y) = gather(test_rows);

    // Classes the model will be asked about but cannot predict: present in
    // this fold's test windows, absent from its training split.
    let mut in_train = [false; NUM_CLASSES];
    for &c in &train_y {
        in_train[c as usize] = true;
    }
    let mut in_test = [false; NUM_CLASSES];
    for &c in &test_y {
        in_test[c as usize] = true;
    }
    let missing: Vec<String> = (0..NUM_CLASSES)
        .filter(|&c| in_test[c] && !in_train[c])
        .filter_map(|c| crate::ingest::SeizureType::from_class_id(c as u8))
        .map(|t| t.code().to_string())
        .collect();
    if !missing.is_empty() {
        log::warn!(
            "fold {fold}: classes {missing:?} absent from the training split; they will never be predicted"
        );
    }

    let scaler_checksum = if opts.standardize {
        let stats = standardize_fit(&train_x, d)?;
        standardize_apply(&stats, &mut train_x);
        standardize_apply(&stats, &mut test_x);
        Some([
            stats.mean.iter().sum::<f64>(),
            stats.std.iter().sum::<f64>(),
        ])
    } else {
        None
    };

    let dataset = crate::classifiers::Dataset::new(train_x, train_y, d)?;
    let model = fit(&dataset, config, derive_seed(opts.seed, fold as u64))?;
    let predictions = predict_labels(&model, &test_x, d)?;

    let confusion = ConfusionMatrix::from_pairs(&test_y, &predictions)?;
    let fold_f1 = weighted_f1(&confusion)?;

    // Seizure-level majority vote over each test seizure's windows.
    let mut per_seizure: BTreeMap<u32, ([u64; NUM_CLASSES], u8)> = BTreeMap::new();
    for (slot, &row) in test_rows.iter().enumerate() {
        let info = features.row(row);
        let entry = per_seizure
            .entry(info.seizure_id)
            .or_insert(([0; NUM_CLASSES], info.label.class_id()));
        entry.0[predictions[slot] as usize] += 1;
    }
    let mut sz_truth = Vec::with_capacity(per_seizure.len());
    let mut sz_pred = Vec::with_capacity(per_seizure.len());
    for (votes, label) in per_seizure.values() {
        let mut best = 0usize;
        for c in 1..NUM_CLASSES {
            if votes[c] > votes[best] {
                best = c;
            }
        }
        sz_truth.push(*label);
        sz_pred.push(best as u8);
    }
    let seizure_confusion = ConfusionMatrix::from_pairs(&sz_truth, &sz_pred)?;
    let seizure_f1 = weighted_f1(&seizure_confusion)?;

    Ok(FoldReport {
        fold,
        train_windows: train_rows.len(),
        test_windows: test_rows.len(),
        weighted_f1: fold_f1,
        seizure_weighted_f1: seizure_f1,
        confusion,
        missing_train_classes: missing,
        scaler_checksum,
    })
}

/// Evaluate a single designated split: fit on every fold except
/// `test_fold`, score on `test_fold`. This is the cheap objective used by
/// the sweep and search protocols.
pub fn run_single_split(
    features: &FeatureMatrix,
    assignment: &FoldAssignment,
    test_fold: usize,
    config: &ClassifierConfig,
    opts: &CvOptions,
) -> Result<FoldReport> {
    if features.is_empty() {
        return Err(Error::EmptyInput("feature matrix"));
    }
    if test_fold >= assignment.k {
        return Err(Error::spec(
            "single split",
            format!(
                "test fold {test_fold} out of range for k = {}",
                assignment.k
            ),
        ));
    }
    let fold_rows = rows_per_fold(features, assignment)?;
    eval_fold(features, &fold_rows, test_fold, config, opts)
}

/// Run k-fold cross-validation at the window level.
///
/// For each fold: fit on windows of seizures outside it (standardization
/// fitted on the training split only), predict the windows inside it.
pub fn run_cv(
    features: &FeatureMatrix,
    assignment: &FoldAssignment,
    config: &ClassifierConfig,
    opts: &CvOptions,
) -> Result<MetricsReport> {
    if features.is_empty() {
        return Err(Error::EmptyInput("feature matrix"));
    }
    let fold_rows = rows_per_fold(features, assignment)?;

    let mut folds = Vec::with_capacity(assignment.k);
    let mut pooled = ConfusionMatrix::default();
    for fold in 0..assignment.k {
        let report = eval_fold(features, &fold_rows, fold, config, opts)?;
        pooled.merge(&report.confusion);
        folds.push(report);
    }

    let mean = folds.iter().map(|f| f.weighted_f1).sum::<f64>() / folds.len() as f64;
    let mean_seizure =
        folds.iter().map(|f| f.seizure_weighted_f1).sum::<f64>() / folds.len() as f64;

    Ok(MetricsReport {
        mode: assignment.mode.name().to_string(),
        k: assignment.k,
        fold_seed: assignment.seed,
        model_seed: opts.seed,
        standardize: opts.standardize,
        classifier: config.clone(),
        per_class: pooled.per_class(),
        pooled_confusion: pooled,
        folds,
        mean_weighted_f1: mean,
        mean_seizure_weighted_f1: mean_seizure,
        spec_echo: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{ClassifierKind, KnnConfig, VoteMode};
    use crate::evaluation::seizure_wise_folds;
    use crate::ingest::{SeizureEvent, SeizureType};

    /// A toy feature matrix: `seizures` seizures per class, `windows` windows
    /// each, features clustered by class with patient offsets.
    fn toy_features(
        classes: &[SeizureType],
        seizures: usize,
        windows: usize,
        spread: f64,
    ) -> (FeatureMatrix, Vec<SeizureEvent>) {
        let mut fm = FeatureMatrix::new(2);
        let mut events = Vec::new();
        let mut seizure_id = 0u32;
        for (ci, &ty) in classes.iter().enumerate() {
            for s in 0..seizures {
                let patient = format!("{}_{s}", ty.code());
                let p = fm.intern_patient(&patient);
                for w in 0..windows {
                    let jitter = (w as f64 * 0.618).fract() * spread;
                    let x = [ci as f64 * 10.0 + jitter, ci as f64 * -5.0 - jitter];
                    fm.push_row(&x, ty, p, seizure_id, w as f64).unwrap();
                }
                events.push(SeizureEvent {
                    patient_id: patient,
                    session_id: format!("s{seizure_id}"),
                    start_s: 0.0,
                    stop_s: windows as f64,
                    ty,
                });
                seizure_id += 1;
            }
        }
        (fm, events)
    }

    fn knn_config() -> ClassifierConfig {
        ClassifierConfig::Knn(KnnConfig {
            k: 3,
            vote: VoteMode::Uniform,
        })
    }

    #[test]
    fn separable_toy_data_scores_high() {
        let (fm, events) = toy_features(
            &[SeizureType::Fnsz, SeizureType::Gnsz, SeizureType::Absz],
            10,
            6,
            0.5,
        );
        let folds = seizure_wise_folds(&events, 5, 3).unwrap();
        let report = run_cv(&fm, &folds, &knn_config(), &CvOptions::default()).unwrap();
        assert!(
            report.mean_weighted_f1 > 0.99,
            "{}",
            report.mean_weighted_f1
        );
        assert_eq!(report.folds.len(), 5);
        assert!(report.mean_seizure_weighted_f1 > 0.99);
    }

    #[test]
    fn cv_is_deterministic() {
        let (fm, events) = toy_features(&[SeizureType::Fnsz, SeizureType::Gnsz], 8, 5, 2.0);
        let folds = seizure_wise_folds(&events, 4, 9).unwrap();
        let opts = CvOptions {
            standardize: true,
            seed: 5,
        };
        let config = ClassifierKind::Sgd.default_config();
        let a = run_cv(&fm, &folds, &config, &opts).unwrap();
        let b = run_cv(&fm, &folds, &config, &opts).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn scaler_statistics_ignore_test_rows() {
        let (mut fm, events) = toy_features(&[SeizureType::Fnsz, SeizureType::Gnsz], 6, 4, 1.0);
        let folds = seizure_wise_folds(&events, 3, 1).unwrap();
        let base = run_cv(&fm, &folds, &knn_config(), &CvOptions::default()).unwrap();

        // Perturb one window of a seizure assigned to fold 0, then compare
        // fold 0's training scaler checksum: it must not move.
        let victim_row = (0..fm.num_rows())
            .find(|&r| folds.fold(fm.row(r).seizure_id) == Some(0))
            .unwrap();
        let victim_seizure = fm.row(victim_row).seizure_id;
        let mut perturbed = FeatureMatrix::new(fm.dim());
        for r in 0..fm.num_rows() {
            let info = fm.row(r).clone();
            let patient = fm.patient_of_row(r).to_string();
            let p = perturbed.intern_patient(&patient);
            let mut x = fm.row_features(r).to_vec();
            if r == victim_row {
                x[0] += 1000.0;
            }
            perturbed
                .push_row(&x, info.label, p, info.seizure_id, info.window_start_s)
                .unwrap();
        }
        fm = perturbed;
        let after = run_cv(&fm, &folds, &knn_config(), &CvOptions::default()).unwrap();
        let fold0 = folds.fold(victim_seizure).unwrap() as usize;
        assert_eq!(
            base.folds[fold0].scaler_checksum, after.folds[fold0].scaler_checksum,
            "training statistics moved when a test row changed"
        );
        // Sanity: folds that train on the perturbed row do see a change.
        let other = (0..3).find(|f| *f != fold0).unwrap();
        assert_ne!(
            base.folds[other].scaler_checksum,
            after.folds[other].scaler_checksum
        );
    }

    #[test]
    fn missing_training_class_is_reported_not_fatal() {
        // Class Tcsz appears in exactly one seizure; the fold holding it
        // trains without that class.
        let (mut fm, mut events) = toy_features(&[SeizureType::Fnsz, SeizureType::Gnsz], 4, 3, 0.5);
        let p = fm.intern_patient("lone");
        let sid = events.len() as u32;
        for w in 0..3 {
            fm.push_row(&[50.0, 50.0], SeizureType::Tcsz, p, sid, w as f64)
                .unwrap();
        }
        events.push(SeizureEvent {
            patient_id: "lone".into(),
            session_id: "sx".into(),
            start_s: 0.0,
            stop_s: 3.0,
            ty: SeizureType::Tcsz,
        });
        // Hand-build a 2-fold assignment: the lone Tcsz seizure in fold 0.
        let mut fold_of = std::collections::BTreeMap::new();
        for i in 0..events.len() as u32 {
            fold_of.insert(i, i % 2);
        }
        fold_of.insert(sid, 0);
        let assignment = FoldAssignment {
            k: 2,
            mode: crate::evaluation::CvMode::SeizureWise,
            seed: 0,
            fold_of,
            patient_folds: Default::default(),
            type_order: Vec::new(),
        };
        let report = run_cv(&fm, &assignment, &knn_config(), &CvOptions::default()).unwrap();
        assert!(report.folds[0]
            .missing_train_classes
            .contains(&"TCSZ".to_string()));
    }

    #[test]
    fn empty_fold_is_an_error() {
        let (fm, events) = toy_features(&[SeizureType::Fnsz], 5, 2, 0.1);
        // Assignment with a fold that owns no seizures.
        let mut fold_of = std::collections::BTreeMap::new();
        for i in 0..events.len() as u32 {
            fold_of.insert(i, 0u32);
        }
        let assignment = FoldAssignment {
            k: 2,
            mode: crate::evaluation::CvMode::SeizureWise,
            seed: 0,
            fold_of,
            patient_folds: Default::default(),
            type_order: Vec::new(),
        };
        assert!(matches!(
            run_cv(&fm, &assignment, &knn_config(), &CvOptions::default()),
            Err(Error::EmptyFold { fold: 1 })
        ));
    }
}
