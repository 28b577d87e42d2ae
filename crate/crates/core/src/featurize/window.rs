//! Overlapping window extraction from a clip.

use crate::featurize::WindowSpec;
use crate::ingest::Recording;

/// One extracted window: N channel rows of `round(W_l * fs)` samples.
#[derive(Debug, Clone)]
pub struct Window {
    /// Start offset in seconds relative to the clip start.
    pub start_s: f64,
    pub samples: Vec<Vec<f64>>,
}

/// Cut a clip into overlapping windows.
///
/// Window `i` starts at `i * (W_l - O)` seconds; the count follows
/// `floor((T - W_l) / (W_l - O)) + 1` and a trailing partial window is
/// discarded. A clip shorter than `W_l` yields zero windows (warned).
pub fn window_clip(clip: &Recording, spec: &WindowSpec) -> Vec<Window> {
    let n = clip.num_samples();
    let len = (spec.w_l * clip.fs).round() as usize;
    if len == 0 || n < len {
        log::warn!(
            "clip of {:.3} s is shorter than the {} s window; no windows emitted",
            clip.duration_s(),
            spec.w_l
        );
        return Vec::new();
    }

    let stride_samples = spec.stride() * clip.fs;
    let mut windows = Vec::new();
    let mut i = 0usize;
    loop {
        let start = (i as f64 * stride_samples).round() as usize;
        if start + len > n {
            break;
        }
        windows.push(Window {
            start_s: i as f64 * spec.stride(),
            samples: clip
                .samples
                .iter()
                .map(|ch| ch[start..start + len].to_vec())
                .collect(),
        });
        i += 1;
    }
    windows
}

/// Continuous-form window count: `floor((T - W_l) / (W_l - O)) + 1`.
pub fn window_count(duration_s: f64, spec: &WindowSpec) -> usize {
    if duration_s < spec.w_l {
        return 0;
    }
    // Slack absorbs float rounding at exact multiples of the stride.
    ((duration_s - spec.w_l) / spec.stride() + 1e-9).floor() as usize + 1
}
