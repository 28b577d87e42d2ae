//! Manifest-to-features integration: real EDF files on disk, window counts,
//! cache determinism, skip reporting.

use std::path::Path;

use szclass_core::evaluation::{fold_balance_report, CvMode};
use szclass_core::featurize::{
    featurize_manifest, read_cache, write_cache, FeatureSpec, FeaturizeOptions, Method, WindowSpec,
};
use szclass_core::ingest::{parse_manifest, Recording};
use szclass_core::synthgen::{generate_corpus, write_edf, GenSpec, DEFAULT_PHYSICAL_RANGE};

fn sine_clip(seconds: usize, channels: usize, fs: f64) -> Recording {
    let n = seconds * fs as usize;
    Recording {
        channels: (0..channels).map(|i| format!("EEG CH{i:02}-REF")).collect(),
        fs,
        samples: (0..channels)
            .map(|c| {
                (0..n)
                    .map(|t| {
                        100.0 * (std::f64::consts::TAU * (4.0 + c as f64) * t as f64 / fs).sin()
                    })
                    .collect()
            })
            .collect(),
    }
}

fn write_manifest(dir: &Path, rows: &[(&str, &str, &str, f64, f64, &str)]) -> String {
    let mut text = String::from("patient_id,session_id,file_path,start_s,stop_s,type\n");
    for (p, s, f, start, stop, ty) in rows {
        text.push_str(&format!("{p},{s},{f},{start},{stop},{ty}\n"));
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, &text).unwrap();
    text
}

#[test]
fn two_ten_second_events_make_74_rows() {
    let dir = tempfile::tempdir().unwrap();
    let clip = sine_clip(10, 3, 250.0);
    write_edf(
        &clip,
        dir.path().join("a.edf"),
        DEFAULT_PHYSICAL_RANGE,
        "p01",
    )
    .unwrap();
    write_edf(
        &clip,
        dir.path().join("b.edf"),
        DEFAULT_PHYSICAL_RANGE,
        "p02",
    )
    .unwrap();
    let text = write_manifest(
        dir.path(),
        &[
            ("p01", "s01", "a.edf", 0.0, 10.0, "FNSZ"),
            ("p02", "s01", "b.edf", 0.0, 10.0, "GNSZ"),
        ],
    );
    let manifest = parse_manifest(&text).unwrap();
    let montage = clip.channels.clone();
    // W_l = 1, O = 0.75: floor((10-1)/0.25) + 1 = 37 windows per event.
    let window = WindowSpec::new(1.0, 0.75).unwrap();
    let spec = FeatureSpec::new(Method::One, 12.0).unwrap();
    let opts = FeaturizeOptions {
        target_fs: 250.0,
        data_root: Some(dir.path().to_path_buf()),
    };
    let out = featurize_manifest(&manifest, &montage, &window, &spec, &opts).unwrap();
    assert_eq!(out.features.num_rows(), 74);
    assert_eq!(out.features.dim(), 3 * 11);
    assert!(out.skipped.is_empty());
    // Provenance: first 37 rows belong to seizure 0/patient p01.
    assert_eq!(out.features.row(0).seizure_id, 0);
    assert_eq!(out.features.row(36).seizure_id, 0);
    assert_eq!(out.features.row(37).seizure_id, 1);
    assert_eq!(out.features.patient_of_row(0), "p01");
    assert_eq!(out.features.row(1).window_start_s, 0.25);
}

#[test]
fn featurization_is_cache_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let clip = sine_clip(10, 2, 250.0);
    write_edf(
        &clip,
        dir.path().join("a.edf"),
        DEFAULT_PHYSICAL_RANGE,
        "p01",
    )
    .unwrap();
    let text = write_manifest(dir.path(), &[("p01", "s01", "a.edf", 0.0, 10.0, "CPSZ")]);
    let manifest = parse_manifest(&text).unwrap();
    let montage = clip.channels.clone();
    let window = WindowSpec::new(2.0, 1.0).unwrap();
    let spec = FeatureSpec::new(Method::Two, 24.0).unwrap();
    let opts = FeaturizeOptions {
        target_fs: 250.0,
        data_root: Some(dir.path().to_path_buf()),
    };

    let a = featurize_manifest(&manifest, &montage, &window, &spec, &opts).unwrap();
    let b = featurize_manifest(&manifest, &montage, &window, &spec, &opts).unwrap();
    let path_a = dir.path().join("a.szft");
    let path_b = dir.path().join("b.szft");
    write_cache(&path_a, &a.features, &window, &spec, &montage).unwrap();
    write_cache(&path_b, &b.features, &window, &spec, &montage).unwrap();
    assert_eq!(
        std::fs::read(&path_a).unwrap(),
        std::fs::read(&path_b).unwrap()
    );

    let (restored, meta) = read_cache(&path_a).unwrap();
    assert_eq!(restored, a.features);
    assert_eq!(meta.method, Method::Two);
}

#[test]
fn unreadable_file_is_skipped_with_a_named_report() {
    let dir = tempfile::tempdir().unwrap();
    let clip = sine_clip(5, 2, 250.0);
    write_edf(
        &clip,
        dir.path().join("a.edf"),
        DEFAULT_PHYSICAL_RANGE,
        "p01",
    )
    .unwrap();
    write_edf(
        &clip,
        dir.path().join("c.edf"),
        DEFAULT_PHYSICAL_RANGE,
        "p03",
    )
    .unwrap();
    let text = write_manifest(
        dir.path(),
        &[
            ("p01", "s01", "a.edf", 0.0, 5.0, "FNSZ"),
            ("p02", "s01", "missing.edf", 0.0, 5.0, "GNSZ"),
            ("p03", "s01", "c.edf", 0.0, 5.0, "ABSZ"),
        ],
    );
    let manifest = parse_manifest(&text).unwrap();
    let montage = clip.channels.clone();
    let window = WindowSpec::new(1.0, 0.0).unwrap();
    let spec = FeatureSpec::new(Method::One, 12.0).unwrap();
    let opts = FeaturizeOptions {
        target_fs: 250.0,
        data_root: Some(dir.path().to_path_buf()),
    };
    let out = featurize_manifest(&manifest, &montage, &window, &spec, &opts).unwrap();
    // Rows only from the two readable files.
    assert_eq!(out.features.num_rows(), 10);
    assert_eq!(out.skipped.len(), 1);
    assert_eq!(out.skipped[0].seizure_id, 1);
    assert!(out.skipped[0].file_path.contains("missing.edf"));
}

#[test]
fn montage_gap_skips_the_event_instead_of_fabricating_data() {
    let dir = tempfile::tempdir().unwrap();
    let full = sine_clip(5, 3, 250.0);
    let mut narrow = sine_clip(5, 2, 250.0);
    narrow.channels = full.channels[..2].to_vec();
    write_edf(
        &full,
        dir.path().join("full.edf"),
        DEFAULT_PHYSICAL_RANGE,
        "p01",
    )
    .unwrap();
    write_edf(
        &narrow,
        dir.path().join("narrow.edf"),
        DEFAULT_PHYSICAL_RANGE,
        "p02",
    )
    .unwrap();
    let text = write_manifest(
        dir.path(),
        &[
            ("p01", "s01", "full.edf", 0.0, 5.0, "FNSZ"),
            ("p02", "s01", "narrow.edf", 0.0, 5.0, "GNSZ"),
        ],
    );
    let manifest = parse_manifest(&text).unwrap();
    let window = WindowSpec::new(1.0, 0.0).unwrap();
    let spec = FeatureSpec::new(Method::One, 12.0).unwrap();
    let opts = FeaturizeOptions {
        target_fs: 250.0,
        data_root: Some(dir.path().to_path_buf()),
    };
    let out = featurize_manifest(&manifest, &full.channels, &window, &spec, &opts).unwrap();
    assert_eq!(out.features.num_rows(), 5);
    assert_eq!(out.skipped.len(), 1);
    assert!(out.skipped[0].reason.contains("EEG CH02-REF"));
}

#[test]
fn balance_report_on_generated_corpus_is_finite_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GenSpec {
        classes: vec![
            szclass_core::SeizureType::Fnsz,
            szclass_core::SeizureType::Gnsz,
            szclass_core::SeizureType::Absz,
        ],
        patients_per_class: 4,
        seizures_per_patient: 3,
        clip_seconds: 16,
        channels: 2,
        fs: 100.0,
        noise_sigma: 1.0,
        separability: 1.0,
        patient_jitter: 0.2,
        amp_jitter: 0.05,
        shared_patients: false,
        seed: 3,
    };
    let corpus = generate_corpus(&spec, dir.path()).unwrap();
    let events = corpus.manifest.events();
    let seeds: Vec<u64> = (0..10).collect();
    let report = fold_balance_report(&events, 3, CvMode::PatientWise, &seeds).unwrap();
    assert_eq!(report.per_seed.len(), 10);
    for per_seed in &report.per_seed {
        let total: usize = per_seed.fold_counts.iter().sum();
        assert_eq!(total, events.len());
    }
    let again = fold_balance_report(&events, 3, CvMode::PatientWise, &seeds).unwrap();
    assert_eq!(report, again);
}
