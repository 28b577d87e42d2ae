//! The two per-window feature extractors.

use crate::error::{Error, Result};
use crate::featurize::{FeatureSpec, Method};
use crate::numerics::{
    fft_magnitude, pearson_correlation, sym_eigenvalues, RealMatrix, JACOBI_MAX_SWEEPS, JACOBI_TOL,
};

/// Bin indices of the one-sided spectrum with `1 <= f < f_max`.
///
/// An epsilon keeps the boundary comparisons exact-at-heart: a bin landing on
/// 1 Hz is kept, one landing on f_max is dropped.
fn band_bins(n: usize, fs: f64, f_max: f64) -> Vec<usize> {
    let resolution = fs / n as f64;
    (1..=n / 2)
        .filter(|&k| {
            let f = k as f64 * resolution;
            f >= 1.0 - 1e-9 && f < f_max - 1e-9
        })
        .collect()
}

/// Per-channel band magnitudes as an (N, B) matrix, shared by both methods.
fn band_magnitudes(window: &[Vec<f64>], fs: f64, f_max: f64) -> Result<(Vec<Vec<f64>>, usize)> {
    if window.is_empty() {
        return Err(Error::EmptyInput("feature window has no channels"));
    }
    let n = window[0].len();
    if window.iter().any(|ch| ch.len() != n) {
        return Err(Error::spec(
            "feature window",
            "channels have unequal lengths".to_string(),
        ));
    }
    let bins = band_bins(n, fs, f_max);
    if bins.is_empty() {
        return Err(Error::spec(
            "feature spec",
            format!(
                "no frequency bins in [1, {f_max}) Hz at resolution {} Hz",
                fs / n as f64
            ),
        ));
    }
    let mut rows = Vec::with_capacity(window.len());
    for ch in window {
        let spectrum = fft_magnitude(ch, fs)?;
        rows.push(bins.iter().map(|&k| spectrum.magnitudes[k]).collect());
    }
    Ok((rows, bins.len()))
}

/// Feature vector length for a given method, channel count and bucket count.
pub fn feature_dim(method: Method, n_channels: usize, buckets: usize) -> usize {
    match method {
        Method::One => n_channels * buckets,
        Method::Two => n_channels * (n_channels - 1) / 2 + n_channels,
    }
}

/// Method 1: log10 of the 1..f_max Hz magnitudes, channel-major.
///
/// Output length is `N * B` with `B = (f_max - 1) * W_l` whenever the window
/// length is exactly `W_l` seconds.
pub fn method1_features(window: &[Vec<f64>], fs: f64, spec: &FeatureSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let (mags, _) = band_magnitudes(window, fs, spec.f_max)?;
    let mut out = Vec::with_capacity(mags.len() * mags[0].len());
    for row in &mags {
        out.extend(row.iter().map(|&m| m.max(spec.log_floor).log10()));
    }
    Ok(out)
}

/// Method 2: bucket-standardized magnitudes -> channel correlation matrix ->
/// strict upper triangle plus eigenvalues sorted by descending magnitude.
pub fn method2_features(window: &[Vec<f64>], fs: f64, spec: &FeatureSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n_ch = window.len();
    if n_ch < 2 {
        return Err(Error::spec(
            "feature window",
            format!("method 2 needs at least 2 channels, got {n_ch}"),
        ));
    }
    let (mut mags, buckets) = band_magnitudes(window, fs, spec.f_max)?;
    if buckets < 2 {
        return Err(Error::spec(
            "feature spec",
            format!("method 2 needs at least 2 frequency buckets, got {buckets}"),
        ));
    }

    // Standardize each frequency bucket across channels; zero-variance
    // buckets map to 0.
    for b in 0..buckets {
        let mean = mags.iter().map(|r| r[b]).sum::<f64>() / n_ch as f64;
        let var = mags.iter().map(|r| (r[b] - mean).powi(2)).sum::<f64>() / n_ch as f64;
        let std = var.sqrt();
        for row in &mut mags {
            row[b] = if std > 0.0 {
                (row[b] - mean) / std
            } else {
                0.0
            };
        }
    }

    let flat: Vec<f64> = mags.iter().flatten().copied().collect();
    let matrix = RealMatrix::new(n_ch, buckets, flat)?;
    let corr = pearson_correlation(&matrix)?;

    let mut eigenvalues = sym_eigenvalues(&corr, JACOBI_TOL, JACOBI_MAX_SWEEPS)?;
    // Descending |lambda|, ties by descending signed value.
    eigenvalues.sort_by(|a, b| {
        b.abs()
            .partial_cmp(&a.abs())
            .unwrap()
            .then(b.partial_cmp(a).unwrap())
    });

    let mut out = corr.upper_triangle();
    out.extend(eigenvalues);
    Ok(out)
}

/// Dispatch on the spec's method.
pub fn extract_features(window: &[Vec<f64>], fs: f64, spec: &FeatureSpec) -> Result<Vec<f64>> {
    match spec.method {
        Method::One => method1_features(window, fs, spec),
        Method::Two => method2_features(window, fs, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(f: f64, fs: f64, n: usize, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|t| amp * (2.0 * std::f64::consts::PI * f * t as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn method1_shape_is_20_by_47() {
        // f_max = 48, W_l = 1 s at 250 Hz: 47 bins per channel.
        let fs = 250.0;
        let window: Vec<Vec<f64>> = (0..20)
            .map(|c| sine(5.0 + c as f64, fs, 250, 10.0))
            .collect();
        let spec = FeatureSpec::new(Method::One, 48.0).unwrap();
        let out = method1_features(&window, fs, &spec).unwrap();
        assert_eq!(out.len(), 20 * 47);
    }

    #[test]
    fn constant_window_clamps_to_log_floor() {
        let fs = 250.0;
        let window = vec![vec![3.0; 250]; 4];
        let spec = FeatureSpec::new(Method::One, 24.0).unwrap();
        let out = method1_features(&window, fs, &spec).unwrap();
        let expected = FeatureSpec::DEFAULT_LOG_FLOOR.log10();
        for v in out {
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn sine_channel_peaks_at_its_bin() {
        let fs = 250.0;
        let spec = FeatureSpec::new(Method::One, 24.0).unwrap();
        let mut window = vec![vec![0.0; 250]; 3];
        window[1] = sine(10.0, fs, 250, 5.0);
        let out = method1_features(&window, fs, &spec).unwrap();
        // 23 bins per channel (f = 1..23); channel 1 occupies out[23..46].
        let ch1 = &out[23..46];
        let argmax = ch1
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        // Bin index 0 is 1 Hz, so 10 Hz sits at index 9.
        assert_eq!(argmax, 9);
    }

    #[test]
    fn method1_is_channel_major() {
        let fs = 250.0;
        let spec = FeatureSpec::new(Method::One, 12.0).unwrap();
        let window = vec![sine(3.0, fs, 250, 8.0), sine(7.0, fs, 250, 8.0)];
        let out = method1_features(&window, fs, &spec).unwrap();
        assert_eq!(out.len(), 2 * 11);
        let (ch0, ch1) = out.split_at(11);
        // 3 Hz peak in channel 0's block (index 2), 7 Hz in channel 1's (index 6).
        let argmax = |xs: &[f64]| {
            xs.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
        };
        assert_eq!(argmax(ch0), 2);
        assert_eq!(argmax(ch1), 6);
    }

    #[test]
    fn method2_dimension_law() {
        let fs = 250.0;
        let spec = FeatureSpec::new(Method::Two, 24.0).unwrap();
        let window: Vec<Vec<f64>> = (0..20)
            .map(|c| sine(4.0 + 0.5 * c as f64, fs, 250, 1.0 + c as f64))
            .collect();
        let out = method2_features(&window, fs, &spec).unwrap();
        assert_eq!(out.len(), 20 * 19 / 2 + 20);
        assert_eq!(out.len(), feature_dim(Method::Two, 20, 23));
    }

    #[test]
    fn identical_channels_give_rank_one_structure() {
        let fs = 250.0;
        let n_ch = 5;
        let base = sine(6.0, fs, 250, 4.0);
        let window = vec![base; n_ch];
        let spec = FeatureSpec::new(Method::Two, 24.0).unwrap();
        let out = method2_features(&window, fs, &spec).unwrap();
        let tri_len = n_ch * (n_ch - 1) / 2;
        for v in &out[..tri_len] {
            assert!((v - 1.0).abs() < 1e-8, "upper triangle entry {v}");
        }
        let eigs = &out[tri_len..];
        assert!((eigs[0] - n_ch as f64).abs() < 1e-8);
        for v in &eigs[1..] {
            assert!(v.abs() < 1e-8);
        }
    }

    #[test]
    fn eigenvalue_block_sorted_by_magnitude() {
        let fs = 250.0;
        let window: Vec<Vec<f64>> = (0..6)
            .map(|c| {
                let mut v = sine(4.0 + c as f64, fs, 500, 2.0);
                for (t, x) in v.iter_mut().enumerate() {
                    *x += ((c * 7919 + t * 104729) % 997) as f64 / 997.0 - 0.5;
                }
                v
            })
            .collect();
        let spec = FeatureSpec::new(Method::Two, 48.0).unwrap();
        let out = method2_features(&window, fs, &spec).unwrap();
        let eigs = &out[15..];
        for pair in eigs.windows(2) {
            assert!(pair[0].abs() >= pair[1].abs() - 1e-12);
        }
    }

    #[test]
    fn method2_matches_compositional_oracle() {
        // Recompute step by step from the independently tested kernels.
        let fs = 250.0;
        let n = 250;
        let window: Vec<Vec<f64>> = (0..4)
            .map(|c| {
                (0..n)
                    .map(|t| {
                        let x = (c * 31 + t * 17) % 101;
                        (x as f64 / 101.0 - 0.5) * 20.0
                    })
                    .collect()
            })
            .collect();
        let spec = FeatureSpec::new(Method::Two, 12.0).unwrap();
        let ours = method2_features(&window, fs, &spec).unwrap();

        // Oracle: fft -> pick bins -> z-score columns -> correlation -> eig.
        let mut mags: Vec<Vec<f64>> = Vec::new();
        for ch in &window {
            let s = fft_magnitude(ch, fs).unwrap();
            let row: Vec<f64> = s
                .frequencies
                .iter()
                .zip(&s.magnitudes)
                .filter(|(f, _)| **f >= 1.0 - 1e-9 && **f < 12.0 - 1e-9)
                .map(|(_, m)| *m)
                .collect();
            mags.push(row);
        }
        let buckets = mags[0].len();
        for b in 0..buckets {
            let mean = mags.iter().map(|r| r[b]).sum::<f64>() / 4.0;
            let std = (mags.iter().map(|r| (r[b] - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
            for r in mags.iter_mut() {
                r[b] = if std > 0.0 { (r[b] - mean) / std } else { 0.0 };
            }
        }
        let flat: Vec<f64> = mags.iter().flatten().copied().collect();
        let corr = pearson_correlation(&RealMatrix::new(4, buckets, flat).unwrap()).unwrap();
        let mut expected = corr.upper_triangle();
        let mut eigs = sym_eigenvalues(&corr, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
        eigs.sort_by(|a, b| {
            b.abs()
                .partial_cmp(&a.abs())
                .unwrap()
                .then(b.partial_cmp(a).unwrap())
        });
        expected.extend(eigs);

        assert_eq!(ours.len(), expected.len());
        for (a, b) in ours.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn no_bins_in_band_is_an_error() {
        // 0.5 s window at 250 Hz has 2 Hz resolution; f_max = 1.5 admits none.
        let window = vec![vec![1.0; 125]; 2];
        let spec = FeatureSpec {
            method: Method::One,
            f_max: 1.5,
            log_floor: 1e-10,
        };
        assert!(method1_features(&window, 250.0, &spec).is_err());
    }

    proptest::proptest! {
        // Method 2 is invariant under a global positive gain plus arbitrary
        // per-channel offsets: offsets only touch the excluded DC bin, and a
        // shared gain cancels in the bucket z-scoring. (Scaling a single
        // channel is NOT invariant: the cross-channel bucket statistics see
        // it by design.)
        #[test]
        fn method2_affine_invariance(
            scale in 0.1f64..10.0,
            offsets in proptest::collection::vec(-50.0f64..50.0, 4),
            seed in 0u64..50,
        ) {
            use rand::prelude::*;
            use rand_chacha::ChaCha8Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fs = 250.0;
            let window: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..250).map(|_| rng.gen_range(-10.0..10.0)).collect())
                .collect();
            let mut mapped = window.clone();
            for (ch, off) in mapped.iter_mut().zip(&offsets) {
                for v in ch.iter_mut() {
                    *v = scale * *v + off;
                }
            }
            let spec = FeatureSpec::new(Method::Two, 24.0).unwrap();
            let a = method2_features(&window, fs, &spec).unwrap();
            let b = method2_features(&mapped, fs, &spec).unwrap();
            for (x, y) in a.iter().zip(&b) {
                proptest::prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
