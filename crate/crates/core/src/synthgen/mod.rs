//! Synthetic EEG corpora for end-to-end verification.
//!
//! Each seizure clip is a sum of narrow-band sinusoids whose frequencies and
//! channel-group mixing weights depend on the class, scaled by a per-patient
//! channel gain (the patient-identity nuisance factor) plus white noise.
//! Sinusoid signatures keep the spectra analytic, so feature-level
//! assertions can be exact.

mod writer;

pub use writer::{write_edf, EdfWriteReport, DEFAULT_PHYSICAL_RANGE};

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::ingest::{
    serialize_manifest, Manifest, ManifestEntry, Recording, SeizureEvent, SeizureType,
};

/// One narrow frequency band of a class signature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub center_hz: f64,
    /// Per-clip frequency jitter range; the rendered tone sits within
    /// `center +- width/2`.
    pub width_hz: f64,
    /// Base amplitude in microvolts.
    pub amplitude: f64,
}

/// Spectral and spatial fingerprint of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSignature {
    pub ty: SeizureType,
    pub bands: Vec<Band>,
    /// `group_weights[g][b]`: gain of band `b` on channel group `g`.
    pub group_weights: Vec<Vec<f64>>,
    /// Per-clip multiplicative amplitude jitter (standard deviation).
    pub amp_jitter: f64,
}

fn default_classes() -> Vec<SeizureType> {
    SeizureType::ALL.to_vec()
}
fn default_patients_per_class() -> usize {
    4
}
fn default_seizures_per_patient() -> usize {
    4
}
fn default_clip_seconds() -> u32 {
    60
}
fn default_channels() -> usize {
    20
}
fn default_fs() -> f64 {
    250.0
}
fn default_noise_sigma() -> f64 {
    4.0
}
fn default_separability() -> f64 {
    1.0
}
fn default_patient_jitter() -> f64 {
    0.2
}
fn default_amp_jitter() -> f64 {
    0.05
}

/// Generation parameters; accepted as a JSON file by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    #[serde(default = "default_classes")]
    pub classes: Vec<SeizureType>,
    #[serde(default = "default_patients_per_class")]
    pub patients_per_class: usize,
    #[serde(default = "default_seizures_per_patient")]
    pub seizures_per_patient: usize,
    #[serde(default = "default_clip_seconds")]
    pub clip_seconds: u32,
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default = "default_fs")]
    pub fs: f64,
    /// White-noise standard deviation in microvolts.
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
    /// Inter-class signature distance in [0, 1]; 0 makes all classes
    /// statistically identical.
    #[serde(default = "default_separability")]
    pub separability: f64,
    /// Per-patient channel gain jitter (uniform in `1 +- jitter`).
    #[serde(default = "default_patient_jitter")]
    pub patient_jitter: f64,
    #[serde(default = "default_amp_jitter")]
    pub amp_jitter: f64,
    /// Give some patients seizures of two classes, exercising the
    /// patient-wise exclusion rule.
    #[serde(default)]
    pub shared_patients: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are complete")
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::spec("gen spec", msg);
        if self.classes.is_empty() || self.classes.len() > 7 {
            return Err(bad(format!("{} classes; need 1..=7", self.classes.len())));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.classes {
            if !seen.insert(*c) {
                return Err(bad(format!("duplicate class {c}")));
            }
        }
        if self.patients_per_class < 3 {
            return Err(bad(format!(
                "patients_per_class = {} must be >= 3 (patient-wise 3-fold needs 3)",
                self.patients_per_class
            )));
        }
        if self.seizures_per_patient == 0 {
            return Err(bad("seizures_per_patient must be >= 1".into()));
        }
        if self.clip_seconds < 16 {
            return Err(bad(format!(
                "clip_seconds = {} must be >= 16 (the largest grid window)",
                self.clip_seconds
            )));
        }
        if self.channels < 2 {
            return Err(bad(format!("channels = {} must be >= 2", self.channels)));
        }
        if !(self.fs > 0.0) || self.fs.fract() != 0.0 {
            return Err(bad(format!(
                "fs = {} must be a positive whole number",
                self.fs
            )));
        }
        if !(0.0..=1.0).contains(&self.separability) {
            return Err(bad(format!(
                "separability = {} must be in [0, 1]",
                self.separability
            )));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(bad(format!(
                "noise_sigma = {} must be >= 0",
                self.noise_sigma
            )));
        }
        if !(0.0..1.0).contains(&self.patient_jitter) {
            return Err(bad(format!(
                "patient_jitter = {} must be in [0, 1)",
                self.patient_jitter
            )));
        }
        let sigs = class_signatures(self);
        for sig in &sigs {
            for band in &sig.bands {
                if band.center_hz + band.width_hz / 2.0 >= self.fs / 2.0 {
                    return Err(bad(format!(
                        "band at {} Hz exceeds the Nyquist rate {}",
                        band.center_hz,
                        self.fs / 2.0
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn montage(&self) -> Vec<String> {
        (0..self.channels)
            .map(|i| format!("EEG CH{i:02}-REF"))
            .collect()
    }

    pub fn num_clips(&self) -> usize {
        self.classes.len() * self.patients_per_class * self.seizures_per_patient
    }
}

const NUM_GROUPS: usize = 4;
const NUM_BANDS: usize = 3;

/// Deterministic class signatures, interpolated toward the class mean by the
/// separability knob: at 0 every class carries the identical signature.
pub fn class_signatures(spec: &GenSpec) -> Vec<ClassSignature> {
    let delta = spec.separability;
    let n_classes = spec.classes.len();

    // Raw per-class band centers and mixing weights.
    let raw_center = |c: usize, b: usize| -> f64 {
        match b {
            0 => 4.0 + 2.0 * c as f64,   // 4..16 Hz
            1 => 20.0 + 1.5 * c as f64,  // 20..29 Hz
            _ => 34.0 + 1.25 * c as f64, // 34..41.5 Hz
        }
    };
    let raw_weight = |c: usize, g: usize, b: usize| -> f64 {
        0.6 + 0.4 * (1.7 * c as f64 + 2.3 * g as f64 + 1.1 * b as f64).sin()
    };

    let mean_center = |b: usize| -> f64 {
        (0..n_classes).map(|c| raw_center(c, b)).sum::<f64>() / n_classes as f64
    };
    let mean_weight = |g: usize, b: usize| -> f64 {
        (0..n_classes).map(|c| raw_weight(c, g, b)).sum::<f64>() / n_classes as f64
    };

    let amplitudes = [40.0, 25.0, 15.0];
    spec.classes
        .iter()
        .enumerate()
        .map(|(c, &ty)| {
            let bands = (0..NUM_BANDS)
                .map(|b| Band {
                    center_hz: mean_center(b) + delta * (raw_center(c, b) - mean_center(b)),
                    width_hz: 0.2,
                    amplitude: amplitudes[b],
                })
                .collect();
            let group_weights = (0..NUM_GROUPS)
                .map(|g| {
                    (0..NUM_BANDS)
                        .map(|b| {
                            mean_weight(g, b) + delta * (raw_weight(c, g, b) - mean_weight(g, b))
                        })
                        .collect()
                })
                .collect();
            ClassSignature {
                ty,
                bands,
                group_weights,
                amp_jitter: spec.amp_jitter,
            }
        })
        .collect()
}

/// Channel-group index of a channel (contiguous groups).
fn group_of(channel: usize, n_channels: usize) -> usize {
    let per_group = n_channels.div_ceil(NUM_GROUPS);
    (channel / per_group).min(NUM_GROUPS - 1)
}

/// Per-patient channel gains drawn once from the patient id.
fn patient_gains(spec: &GenSpec, patient_id: &str) -> Vec<f64> {
    let hash = crate::featurize::montage_hash(&[patient_id.to_string()]);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, hash));
    (0..spec.channels)
        .map(|_| 1.0 + spec.patient_jitter * rng.gen_range(-1.0..1.0))
        .collect()
}

/// Render one seizure clip: signature tones x patient gain + white noise.
pub fn render_clip(
    spec: &GenSpec,
    signature: &ClassSignature,
    gains: &[f64],
    clip_seed: u64,
) -> Recording {
    let n = spec.clip_seconds as usize * spec.fs as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(clip_seed);

    // Per-clip draws shared across channels: band frequency and phase, plus
    // one amplitude jitter factor.
    let tones: Vec<(f64, f64, f64)> = signature
        .bands
        .iter()
        .map(|band| {
            let f = band.center_hz + band.width_hz * rng.gen_range(-0.5..0.5);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (f, phase, band.amplitude)
        })
        .collect();
    let amp_scale = (1.0 + signature.amp_jitter * rng.gen_range(-1.0..1.0)).max(0.1);

    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let dt = 1.0 / spec.fs;
    let samples: Vec<Vec<f64>> = (0..spec.channels)
        .map(|ch| {
            let g = group_of(ch, spec.channels);
            let weights = &signature.group_weights[g];
            let gain = gains[ch] * amp_scale;
            (0..n)
                .map(|t| {
                    let time = t as f64 * dt;
                    let mut v = 0.0;
                    for (b, &(f, phase, amp)) in tones.iter().enumerate() {
                        v += weights[b] * amp * (std::f64::consts::TAU * f * time + phase).sin();
                    }
                    gain * v + spec.noise_sigma * noise.sample(&mut rng)
                })
                .collect()
        })
        .collect();

    Recording {
        channels: spec.montage(),
        fs: spec.fs,
        samples,
    }
}

/// Everything [`generate_corpus`] produced.
#[derive(Debug)]
pub struct GeneratedCorpus {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub edf_dir: PathBuf,
    /// Samples clipped to the physical range across all files.
    pub clipped_samples: u64,
}

/// Patient ids per class slot.
///
/// With `shared_patients`, the first patient of every class after the first
/// is the previous class's second patient, so each shared patient carries
/// exactly two classes and the patient-wise exclusion rule gets exercised.
fn patient_roster(spec: &GenSpec) -> Vec<Vec<String>> {
    let mut roster: Vec<Vec<String>> = Vec::with_capacity(spec.classes.len());
    for (ci, ty) in spec.classes.iter().enumerate() {
        let mut patients = Vec::with_capacity(spec.patients_per_class);
        for p in 0..spec.patients_per_class {
            if spec.shared_patients && ci > 0 && p == 0 {
                patients.push(roster[ci - 1][1].clone());
            } else {
                patients.push(format!("{}p{p:02}", ty.code().to_lowercase()));
            }
        }
        roster.push(patients);
    }
    roster
}

/// Generate a labeled corpus: one EDF file per seizure clip plus the
/// manifest CSV. Identical specs produce byte-identical corpora.
pub fn generate_corpus(spec: &GenSpec, out_dir: impl AsRef<Path>) -> Result<GeneratedCorpus> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    let edf_dir = out_dir.join("edf");
    std::fs::create_dir_all(&edf_dir).map_err(|e| Error::io(edf_dir.display().to_string(), e))?;

    let signatures = class_signatures(spec);
    let roster = patient_roster(spec);

    // Plan all clips first, then render in parallel with per-clip seeds.
    struct ClipPlan {
        ty: SeizureType,
        sig_index: usize,
        patient: String,
        session: String,
        file_name: String,
        clip_seed: u64,
    }
    let mut plans = Vec::with_capacity(spec.num_clips());
    for (ci, _) in spec.classes.iter().enumerate() {
        for patient_id in &roster[ci] {
            for _s in 0..spec.seizures_per_patient {
                let idx = plans.len() as u64;
                let patient = patient_id.clone();
                let session = format!("s{idx:04}");
                plans.push(ClipPlan {
                    ty: signatures[ci].ty,
                    sig_index: ci,
                    patient: patient.clone(),
                    session: session.clone(),
                    file_name: format!("{patient}_{session}.edf"),
                    clip_seed: derive_seed(spec.seed, idx),
                });
            }
        }
    }

    let clipped: u64 = plans
        .par_iter()
        .map(|plan| -> Result<u64> {
            let gains = patient_gains(spec, &plan.patient);
            let clip = render_clip(spec, &signatures[plan.sig_index], &gains, plan.clip_seed);
            let report = write_edf(
                &clip,
                edf_dir.join(&plan.file_name),
                DEFAULT_PHYSICAL_RANGE,
                &plan.patient,
            )?;
            Ok(report.clipped_samples)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let mut manifest = Manifest {
        version: "synthetic".to_string(),
        ..Manifest::default()
    };
    for plan in &plans {
        manifest.entries.push(ManifestEntry {
            event: SeizureEvent {
                patient_id: plan.patient.clone(),
                session_id: plan.session.clone(),
                start_s: 0.0,
                stop_s: spec.clip_seconds as f64,
                ty: plan.ty,
            },
            file_path: format!("edf/{}", plan.file_name),
        });
    }

    let manifest_path = out_dir.join("manifest.csv");
    std::fs::write(&manifest_path, serialize_manifest(&manifest))
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;

    if clipped > 0 {
        log::warn!("{clipped} samples exceeded the physical range and were clipped");
    }

    Ok(GeneratedCorpus {
        manifest,
        manifest_path,
        edf_dir,
        clipped_samples: clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{dataset_stats, parse_manifest};
    use crate::numerics::fft_magnitude;

    fn tiny_spec() -> GenSpec {
        GenSpec {
            classes: vec![SeizureType::Fnsz, SeizureType::Gnsz],
            patients_per_class: 3,
            seizures_per_patient: 2,
            clip_seconds: 16,
            channels: 4,
            fs: 250.0,
            noise_sigma: 1.0,
            separability: 1.0,
            patient_jitter: 0.2,
            amp_jitter: 0.05,
            shared_patients: false,
            seed: 11,
        }
    }

    #[test]
    fn corpus_size_matches_the_spec() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec();
        let corpus = generate_corpus(&spec, dir.path()).unwrap();
        assert_eq!(corpus.manifest.len(), spec.num_clips());
        assert_eq!(corpus.manifest.len(), 2 * 3 * 2);
        let files: Vec<_> = std::fs::read_dir(&corpus.edf_dir).unwrap().collect();
        assert_eq!(files.len(), spec.num_clips());
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let spec = tiny_spec();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let a = generate_corpus(&spec, dir_a.path()).unwrap();
        let b = generate_corpus(&spec, dir_b.path()).unwrap();
        assert_eq!(
            std::fs::read(&a.manifest_path).unwrap(),
            std::fs::read(&b.manifest_path).unwrap()
        );
        for entry in &a.manifest.entries {
            let fa = std::fs::read(dir_a.path().join(&entry.file_path)).unwrap();
            let fb = std::fs::read(dir_b.path().join(&entry.file_path)).unwrap();
            assert_eq!(fa, fb, "{}", entry.file_path);
        }
    }

    #[test]
    fn manifest_round_trips_and_stats_match_generation() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec();
        let corpus = generate_corpus(&spec, dir.path()).unwrap();
        let text = std::fs::read_to_string(&corpus.manifest_path).unwrap();
        let parsed = parse_manifest(&text).unwrap();
        assert_eq!(parsed, corpus.manifest);

        let stats = dataset_stats(&parsed).unwrap();
        assert_eq!(stats.len(), 2);
        for row in stats {
            assert_eq!(row.n_seizures, 6);
            assert_eq!(row.n_patients, 3);
            assert!((row.duration_s - 6.0 * 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn patient_ids_are_class_disjoint_unless_shared() {
        let spec = tiny_spec();
        let roster = patient_roster(&spec);
        let all: std::collections::BTreeSet<_> = roster.iter().flatten().collect();
        assert_eq!(all.len(), 6);

        let shared = GenSpec {
            shared_patients: true,
            ..tiny_spec()
        };
        let roster = patient_roster(&shared);
        assert_eq!(roster[1][0], roster[0][1]);
        let all: std::collections::BTreeSet<_> = roster.iter().flatten().collect();
        assert_eq!(all.len(), 5);
    }

    #[test]
    fn noiseless_clip_peaks_at_signature_centers() {
        let spec = GenSpec {
            noise_sigma: 0.0,
            amp_jitter: 0.0,
            patient_jitter: 0.0,
            ..tiny_spec()
        };
        let signatures = class_signatures(&spec);
        for sig in &signatures {
            let gains = vec![1.0; spec.channels];
            let clip = render_clip(&spec, sig, &gains, 3);
            let spectrum = fft_magnitude(&clip.samples[0], spec.fs).unwrap();
            for band in &sig.bands {
                // Dominant bin within this band's +-2 Hz neighborhood must
                // sit within half a bin plus the frequency jitter.
                let lo = band.center_hz - 2.0;
                let hi = band.center_hz + 2.0;
                let (best_f, _) = spectrum
                    .frequencies
                    .iter()
                    .zip(&spectrum.magnitudes)
                    .filter(|(f, _)| **f >= lo && **f <= hi)
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(f, m)| (*f, *m))
                    .unwrap();
                let slack = spectrum.resolution / 2.0 + band.width_hz / 2.0;
                assert!(
                    (best_f - band.center_hz).abs() <= slack + 1e-9,
                    "band {} Hz peaked at {best_f} Hz",
                    band.center_hz
                );
            }
        }
    }

    #[test]
    fn zero_separability_collapses_signatures() {
        let spec = GenSpec {
            separability: 0.0,
            ..tiny_spec()
        };
        let sigs = class_signatures(&spec);
        for s in &sigs[1..] {
            assert_eq!(s.bands, sigs[0].bands);
            assert_eq!(s.group_weights, sigs[0].group_weights);
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(GenSpec {
            patients_per_class: 2,
            ..tiny_spec()
        }
        .validate()
        .is_err());
        assert!(GenSpec {
            clip_seconds: 8,
            ..tiny_spec()
        }
        .validate()
        .is_err());
        assert!(GenSpec {
            fs: 250.5,
            ..tiny_spec()
        }
        .validate()
        .is_err());
        assert!(GenSpec {
            separability: 1.5,
            ..tiny_spec()
        }
        .validate()
        .is_err());
        assert!(
            GenSpec {
                fs: 64.0,
                ..tiny_spec()
            }
            .validate()
            .is_err(),
            "bands exceed Nyquist"
        );
        assert!(tiny_spec().validate().is_ok());
    }
}
