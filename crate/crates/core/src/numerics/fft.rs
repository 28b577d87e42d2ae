//! One-sided discrete Fourier magnitude spectra.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// One-sided magnitude spectrum of a real signal.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Bin center frequencies in Hz, ascending: `k * fs / n`.
    pub frequencies: Vec<f64>,
    /// Unnormalized DFT magnitudes `|X_k|`, one per bin.
    pub magnitudes: Vec<f64>,
    /// Frequency resolution `fs / n` in Hz.
    pub resolution: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }
}

/// One-sided magnitude spectrum `|X_k|` for `k = 0..=n/2` at `k*fs/n` Hz.
///
/// Magnitudes follow the plain DFT sum convention (no normalization): a
/// constant signal `c` of length `n` has magnitude `n*|c|` at 0 Hz, a unit
/// sinusoid aligned with bin `k` has magnitude `n/2` there.
pub fn fft_magnitude(samples: &[f64], fs: f64) -> Result<Spectrum> {
    if samples.len() < 2 {
        return Err(Error::EmptyInput("fft_magnitude needs at least 2 samples"));
    }
    if !(fs > 0.0) {
        return Err(Error::spec(
            "sampling rate",
            format!("fs = {fs} must be > 0"),
        ));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fft_magnitude input"));
    }

    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let resolution = fs / n as f64;
    let frequencies = (0..bins).map(|k| k as f64 * resolution).collect();
    let magnitudes = buf[..bins].iter().map(|c| c.norm()).collect();

    Ok(Spectrum {
        frequencies,
        magnitudes,
        resolution,
    })
}

#[cfg(test)]
pub(crate) mod test_oracle {
    /// Direct O(n^2) DFT magnitudes, independent of the FFT path.
    ///
    /// The phase index is reduced mod n before the float multiply so the
    /// twiddle angles stay accurate for large k*t.
    pub fn dft_magnitude(samples: &[f64]) -> Vec<f64> {
        let n = samples.len();
        let step = 2.0 * std::f64::consts::PI / n as f64;
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0_f64, 0.0_f64);
                for (t, &x) in samples.iter().enumerate() {
                    let angle = ((k * t) % n) as f64 * step;
                    re += x * angle.cos();
                    im -= x * angle.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }
}
