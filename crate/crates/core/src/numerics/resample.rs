//! Linear-interpolation resampling.

use crate::error::{Error, Result};

/// Resample `samples` from `fs_in` to `fs_out` by linear interpolation.
///
/// Output length is `round(n * fs_out / fs_in)`; sample `i` interpolates the
/// input at time `i / fs_out`, with positions past the last input sample
/// clamped to it. Exact on affine signals.
pub fn resample_linear(samples: &[f64], fs_in: f64, fs_out: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("resample_linear input"));
    }
    if !(fs_in > 0.0) || !(fs_out > 0.0) {
        return Err(Error::spec(
            "sampling rate",
            format!("fs_in = {fs_in}, fs_out = {fs_out} must be > 0"),
        ));
    }
    if (fs_in - fs_out).abs() < f64::EPSILON * fs_in {
        return Ok(samples.to_vec());
    }

    let n = samples.len();
    let out_len = ((n as f64 * fs_out / fs_in).round() as usize).max(1);
    let ratio = fs_in / fs_out;
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let pos = i as f64 * ratio;
        let idx = pos.floor() as usize;
        if idx + 1 >= n {
            out.push(samples[n - 1]);
        } else {
            let frac = pos - idx as f64;
            out.push(samples[idx] * (1.0 - frac) + samples[idx + 1] * frac);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_rates_match() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(resample_linear(&x, 250.0, 250.0).unwrap(), x);
    }

    #[test]
    fn exact_on_linear_ramp() {
        // Linear interpolation reproduces affine signals exactly.
        let fs_in = 256.0;
        let fs_out = 250.0;
        let x: Vec<f64> = (0..512).map(|i| 0.3 * i as f64 / fs_in - 1.0).collect();
        let y = resample_linear(&x, fs_in, fs_out).unwrap();
        assert_eq!(y.len(), (512.0 * fs_out / fs_in).round() as usize);
        for (i, v) in y.iter().enumerate() {
            let t = i as f64 / fs_out;
            if t <= 511.0 / fs_in {
                assert!((v - (0.3 * t - 1.0)).abs() < 1e-12, "sample {i}");
            }
        }
    }

    #[test]
    fn sine_tracks_analytic_oracle() {
        let fs_in = 400.0;
        let fs_out = 250.0;
        let f = 5.0;
        let x: Vec<f64> = (0..800)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs_in).sin())
            .collect();
        let y = resample_linear(&x, fs_in, fs_out).unwrap();
        let mut max_dev = 0.0_f64;
        for (i, v) in y.iter().enumerate() {
            let t = i as f64 / fs_out;
            if t < 799.0 / fs_in {
                let oracle = (2.0 * std::f64::consts::PI * f * t).sin();
                max_dev = max_dev.max((v - oracle).abs());
            }
        }
        assert!(max_dev < 0.01, "max deviation {max_dev}");
    }

    #[test]
    fn rejects_empty_input() {
        assert!(matches!(
            resample_linear(&[], 100.0, 200.0),
            Err(Error::EmptyInput(_))
        ));
    }
}
