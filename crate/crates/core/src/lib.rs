//! # szclass-core: EEG seizure-type classification pipeline
//!
//! Everything needed to go from raw EDF recordings plus a seizure manifest to
//! cross-validated classification scores:
//!
//! ```text
//! manifest.csv + *.edf
//!   │
//!   ├─ ingest      EDF header/data parsing, manifest CSV, dataset statistics
//!   ├─ numerics    FFT magnitude spectra, Pearson correlation, Jacobi
//!   │              eigenvalues, linear resampling
//!   ├─ featurize   windowing, log-spectral features (method 1),
//!   │              correlation eigenfeatures (method 2), binary feature cache
//!   ├─ classifiers k-NN, SGD multinomial logistic, gradient-boosted trees
//!   ├─ evaluation  seizure-wise / patient-wise folds, weighted F1, CV driver
//!   ├─ hpo         preprocessing grid sweep, seeded random search
//!   └─ synthgen    synthetic EEG corpora (EDF + manifest) for end-to-end
//!                  verification without clinical data
//! ```
//!
//! All randomness is funneled through explicit `u64` seeds; identical inputs
//! and seeds give identical outputs, including across worker counts.

// Validation guards are written `!(x > 0.0)` on purpose: the negation is
// what rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod error;
pub mod evaluation;
pub mod featurize;
pub mod hpo;
pub mod ingest;
pub mod numerics;
pub mod synthgen;

pub use error::{Error, ErrorKind, Result};
pub use ingest::{Manifest, Recording, SeizureEvent, SeizureType};

/// Number of seizure classes in scope (MYSZ is excluded at parse time).
pub const NUM_CLASSES: usize = 7;

/// Stable per-stream seed derivation (splitmix64 mix), so parallel units can
/// draw independent deterministic seeds from one root seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
