//! EDF writing for generated clips (1-second data records).

use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::Recording;

/// Symmetric physical range giving a 0.1 uV quantization step over the
/// 16-bit digital range.
pub const DEFAULT_PHYSICAL_RANGE: (f64, f64) = (-3276.8, 3276.7);

const DIGITAL_MIN: i32 = -32768;
const DIGITAL_MAX: i32 = 32767;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdfWriteReport {
    /// Samples outside the physical range, clipped to its edges.
    pub clipped_samples: u64,
}

fn fixed_field(out: &mut Vec<u8>, value: &str, width: usize, what: &str) -> Result<()> {
    let bytes = value.as_bytes();
    if bytes.len() > width || !value.is_ascii() {
        return Err(Error::spec(
            "edf writer",
            format!("{what} {value:?} does not fit in {width} ASCII bytes"),
        ));
    }
    out.extend_from_slice(bytes);
    out.resize(out.len() + (width - bytes.len()), b' ');
    Ok(())
}

/// Write a recording as a standard EDF file with 1-second records.
///
/// The sampling rate must be a whole number of Hz and the clip a whole
/// number of seconds. Samples outside `physical_range` are clipped to the
/// range edges and counted.
pub fn write_edf(
    recording: &Recording,
    path: impl AsRef<Path>,
    physical_range: (f64, f64),
    patient_id: &str,
) -> Result<EdfWriteReport> {
    let path_str = path.as_ref().display().to_string();
    let (pmin, pmax) = physical_range;
    if !(pmax > pmin) {
        return Err(Error::spec(
            "edf writer",
            format!("physical range [{pmin}, {pmax}] is empty"),
        ));
    }
    let n_signals = recording.num_channels();
    if n_signals == 0 || recording.num_samples() == 0 {
        return Err(Error::EmptyInput("recording"));
    }
    if recording.fs.fract() != 0.0 || recording.fs <= 0.0 {
        return Err(Error::spec(
            "edf writer",
            format!(
                "fs = {} must be a positive whole number of Hz",
                recording.fs
            ),
        ));
    }
    let samples_per_record = recording.fs as usize;
    let total = recording.num_samples();
    if !total.is_multiple_of(samples_per_record) {
        return Err(Error::spec(
            "edf writer",
            format!(
                "clip of {total} samples at {} Hz is not a whole number of seconds",
                recording.fs
            ),
        ));
    }
    let n_records = total / samples_per_record;

    let mut out = Vec::with_capacity(256 + 256 * n_signals + total * n_signals * 2);
    fixed_field(&mut out, "0", 8, "version")?;
    fixed_field(&mut out, patient_id, 80, "patient id")?;
    fixed_field(&mut out, "synthetic recording", 80, "recording id")?;
    fixed_field(&mut out, "01.01.00", 8, "start date")?;
    fixed_field(&mut out, "00.00.00", 8, "start time")?;
    fixed_field(
        &mut out,
        &(256 + 256 * n_signals).to_string(),
        8,
        "header bytes",
    )?;
    fixed_field(&mut out, "", 44, "reserved")?;
    fixed_field(&mut out, &n_records.to_string(), 8, "record count")?;
    fixed_field(&mut out, "1", 8, "record duration")?;
    fixed_field(&mut out, &n_signals.to_string(), 4, "signal count")?;

    for label in &recording.channels {
        fixed_field(&mut out, label, 16, "label")?;
    }
    for _ in 0..n_signals {
        fixed_field(&mut out, "synthetic", 80, "transducer")?;
    }
    for _ in 0..n_signals {
        fixed_field(&mut out, "uV", 8, "physical dimension")?;
    }
    let pmin_s = format!("{pmin}");
    let pmax_s = format!("{pmax}");
    for _ in 0..n_signals {
        fixed_field(&mut out, &pmin_s, 8, "physical min")?;
    }
    for _ in 0..n_signals {
        fixed_field(&mut out, &pmax_s, 8, "physical max")?;
    }
    for _ in 0..n_signals {
        fixed_field(&mut out, &DIGITAL_MIN.to_string(), 8, "digital min")?;
    }
    for _ in 0..n_signals {
        fixed_field(&mut out, &DIGITAL_MAX.to_string(), 8, "digital max")?;
    }
    for _ in 0..n_signals {
        fixed_field(&mut out, "", 80, "prefilter")?;
    }
    for _ in 0..n_signals {
        fixed_field(
            &mut out,
            &samples_per_record.to_string(),
            8,
            "samples per record",
        )?;
    }
    for _ in 0..n_signals {
        fixed_field(&mut out, "", 32, "signal reserved")?;
    }

    let scale = (DIGITAL_MAX - DIGITAL_MIN) as f64 / (pmax - pmin);
    let mut clipped = 0u64;
    for record in 0..n_records {
        for ch in &recording.samples {
            for t in 0..samples_per_record {
                let v = ch[record * samples_per_record + t];
                let mut d = (DIGITAL_MIN as f64 + (v - pmin) * scale).round();
                if d < DIGITAL_MIN as f64 {
                    d = DIGITAL_MIN as f64;
                    clipped += 1;
                } else if d > DIGITAL_MAX as f64 {
                    d = DIGITAL_MAX as f64;
                    clipped += 1;
                }
                out.extend_from_slice(&(d as i16).to_le_bytes());
            }
        }
    }

    std::fs::write(path.as_ref(), &out).map_err(|e| Error::io(&path_str, e))?;
    if clipped > 0 {
        log::warn!("{path_str}: clipped {clipped} samples to [{pmin}, {pmax}]");
    }
    Ok(EdfWriteReport {
        clipped_samples: clipped,
    })
}
