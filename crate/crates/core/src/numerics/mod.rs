//! Deterministic numerical kernels.
//!
//! Pure functions only: FFT magnitude spectra, Pearson correlation matrices,
//! real symmetric eigenvalues (cyclic Jacobi), and linear resampling. Safe
//! for unlimited parallel invocation.

mod correlation;
mod eigen;
mod fft;
mod matrix;
mod resample;

pub use correlation::pearson_correlation;
pub use eigen::{sym_eigenvalues, JACOBI_MAX_SWEEPS, JACOBI_TOL};
pub use fft::{fft_magnitude, Spectrum};
pub use matrix::RealMatrix;
pub use resample::resample_linear;
