//! EDF (European Data Format) reading.
//!
//! Standard EDF only: 256-byte main header, 256 bytes per signal header,
//! then data records of 16-bit little-endian two's-complement samples.
//! Discontinuous "EDF+D" files and EDF+ annotation channels are rejected.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::Recording;
use crate::numerics::resample_linear;

const MAIN_HEADER_LEN: usize = 256;
const SIGNAL_HEADER_LEN: usize = 256;

/// Fixed-width fields of the 256-byte EDF main header.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version: String,
    pub patient_id: String,
    pub recording_id: String,
    pub start_date: String,
    pub start_time: String,
    pub header_bytes: usize,
    pub reserved: String,
    /// Number of data records; -1 means unknown.
    pub num_records: i64,
    /// Duration of one data record in seconds.
    pub record_duration: f64,
    pub num_signals: usize,
}

/// Per-signal EDF header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalHeader {
    pub label: String,
    pub transducer: String,
    pub physical_dimension: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefilter: String,
    pub samples_per_record: usize,
}

impl SignalHeader {
    /// Native sampling rate in Hz given the record duration.
    pub fn sampling_rate(&self, record_duration: f64) -> f64 {
        self.samples_per_record as f64 / record_duration
    }

    /// Digital-to-physical calibration:
    /// `phys = physMin + (d - digMin) * (physMax - physMin) / (digMax - digMin)`.
    pub fn to_physical(&self, digital: i16) -> f64 {
        self.physical_min
            + (digital as f64 - self.digital_min as f64) * (self.physical_max - self.physical_min)
                / (self.digital_max as f64 - self.digital_min as f64)
    }
}

fn ascii_field<'a>(raw: &'a [u8], path: &str, start: usize, len: usize) -> Result<&'a str> {
    let bytes = raw
        .get(start..start + len)
        .ok_or_else(|| Error::edf(path, format!("truncated header at byte {start}")))?;
    std::str::from_utf8(bytes)
        .map(str::trim)
        .map_err(|_| Error::edf(path, format!("non-ASCII header field at byte {start}")))
}

fn numeric_field<T: std::str::FromStr>(
    raw: &[u8],
    path: &str,
    start: usize,
    len: usize,
    name: &str,
) -> Result<T> {
    let s = ascii_field(raw, path, start, len)?;
    s.parse()
        .map_err(|_| Error::edf(path, format!("non-numeric {name} field: {s:?}")))
}

/// Parse the main header and all signal headers from raw EDF bytes, without
/// touching the data records.
pub fn parse_edf_header(raw: &[u8]) -> Result<(EdfHeader, Vec<SignalHeader>)> {
    parse_edf_header_at(raw, "<bytes>")
}

fn parse_edf_header_at(raw: &[u8], path: &str) -> Result<(EdfHeader, Vec<SignalHeader>)> {
    if raw.len() < MAIN_HEADER_LEN {
        return Err(Error::edf(
            path,
            format!(
                "file holds {} bytes, fewer than the 256-byte header",
                raw.len()
            ),
        ));
    }

    let header = EdfHeader {
        version: ascii_field(raw, path, 0, 8)?.to_string(),
        patient_id: ascii_field(raw, path, 8, 80)?.to_string(),
        recording_id: ascii_field(raw, path, 88, 80)?.to_string(),
        start_date: ascii_field(raw, path, 168, 8)?.to_string(),
        start_time: ascii_field(raw, path, 176, 8)?.to_string(),
        header_bytes: numeric_field(raw, path, 184, 8, "header byte count")?,
        reserved: ascii_field(raw, path, 192, 44)?.to_string(),
        num_records: numeric_field(raw, path, 236, 8, "record count")?,
        record_duration: numeric_field(raw, path, 244, 8, "record duration")?,
        num_signals: numeric_field(raw, path, 252, 4, "signal count")?,
    };

    if header.num_signals == 0 {
        return Err(Error::edf(path, "signal count is 0"));
    }
    if !(header.record_duration > 0.0) {
        return Err(Error::edf(
            path,
            format!("record duration {} must be > 0", header.record_duration),
        ));
    }
    if header.num_records < -1 {
        return Err(Error::edf(
            path,
            format!("record count {}", header.num_records),
        ));
    }
    let expected = MAIN_HEADER_LEN + SIGNAL_HEADER_LEN * header.num_signals;
    if header.header_bytes != expected {
        return Err(Error::edf(
            path,
            format!(
                "header size mismatch: field says {} but {} signals need {}",
                header.header_bytes, header.num_signals, expected
            ),
        ));
    }
    if header.reserved.starts_with("EDF+D") {
        return Err(Error::edf(
            path,
            "discontinuous EDF+D files are not supported",
        ));
    }
    if raw.len() < expected {
        return Err(Error::edf(
            path,
            format!(
                "truncated signal headers: have {} bytes, need {expected}",
                raw.len()
            ),
        ));
    }

    let ns = header.num_signals;
    // Signal header fields are stored column-wise: ns labels, then ns
    // transducers, and so on.
    let base = MAIN_HEADER_LEN;
    let mut signals = Vec::with_capacity(ns);
    for i in 0..ns {
        let label = ascii_field(raw, path, base + 16 * i, 16)?.to_string();
        if label == "EDF Annotations" {
            return Err(Error::edf(
                path,
                "EDF+ annotation channels are not supported",
            ));
        }
        let transducer = ascii_field(raw, path, base + 16 * ns + 80 * i, 80)?.to_string();
        let physical_dimension = ascii_field(raw, path, base + 96 * ns + 8 * i, 8)?.to_string();
        let physical_min: f64 =
            numeric_field(raw, path, base + 104 * ns + 8 * i, 8, "physical min")?;
        let physical_max: f64 =
            numeric_field(raw, path, base + 112 * ns + 8 * i, 8, "physical max")?;
        let digital_min: i32 = numeric_field(raw, path, base + 120 * ns + 8 * i, 8, "digital min")?;
        let digital_max: i32 = numeric_field(raw, path, base + 128 * ns + 8 * i, 8, "digital max")?;
        let prefilter = ascii_field(raw, path, base + 136 * ns + 80 * i, 80)?.to_string();
        let samples_per_record: usize =
            numeric_field(raw, path, base + 216 * ns + 8 * i, 8, "samples per record")?;

        if digital_max <= digital_min {
            return Err(Error::edf(
                path,
                format!("signal {label:?}: digital range [{digital_min}, {digital_max}] is empty"),
            ));
        }
        if physical_max == physical_min {
            return Err(Error::edf(
                path,
                format!("signal {label:?}: physical min equals physical max"),
            ));
        }
        if samples_per_record == 0 {
            return Err(Error::edf(
                path,
                format!("signal {label:?}: 0 samples per record"),
            ));
        }

        signals.push(SignalHeader {
            label,
            transducer,
            physical_dimension,
            physical_min,
            physical_max,
            digital_min,
            digital_max,
            prefilter,
            samples_per_record,
        });
    }

    Ok((header, signals))
}

/// A fully loaded EDF file: parsed headers plus raw data record bytes.
#[derive(Debug, Clone)]
pub struct EdfFile {
    pub header: EdfHeader,
    pub signals: Vec<SignalHeader>,
    path: String,
    data: Vec<u8>,
    /// Record count, inferred from the file size when the header says -1.
    num_records: usize,
    /// Total i16 samples per record across all signals.
    record_len: usize,
}

impl EdfFile {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path_str = path.as_ref().display().to_string();
        let raw = fs::read(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
        Self::from_bytes(raw, path_str)
    }

    pub fn from_bytes(raw: Vec<u8>, path: String) -> Result<Self> {
        let (header, signals) = parse_edf_header_at(&raw, &path)?;
        let record_len: usize = signals.iter().map(|s| s.samples_per_record).sum();
        let data = raw[header.header_bytes..].to_vec();
        let num_records = if header.num_records >= 0 {
            let n = header.num_records as usize;
            if data.len() < n * record_len * 2 {
                return Err(Error::edf(
                    &path,
                    format!(
                        "data section holds {} bytes, need {} for {} records",
                        data.len(),
                        n * record_len * 2,
                        n
                    ),
                ));
            }
            n
        } else {
            data.len() / (record_len * 2)
        };
        Ok(Self {
            header,
            signals,
            path: path.clone(),
            data,
            num_records,
            record_len,
        })
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn duration_s(&self) -> f64 {
        self.num_records as f64 * self.header.record_duration
    }

    pub fn channel_labels(&self) -> Vec<String> {
        self.signals.iter().map(|s| s.label.clone()).collect()
    }

    fn signal_index(&self, label: &str) -> Option<usize> {
        self.signals.iter().position(|s| s.label == label.trim())
    }

    /// Raw digital samples of one signal over `[t0, t1)` seconds.
    fn digital_window(&self, sig: usize, t0: f64, t1: f64) -> Vec<i16> {
        let sh = &self.signals[sig];
        let rate = sh.sampling_rate(self.header.record_duration);
        let total = self.num_records * sh.samples_per_record;
        let i0 = ((t0 * rate).round() as usize).min(total);
        let i1 = ((t1 * rate).round() as usize).min(total);
        let offset_in_record: usize = self.signals[..sig]
            .iter()
            .map(|s| s.samples_per_record)
            .sum();

        let mut out = Vec::with_capacity(i1.saturating_sub(i0));
        for s in i0..i1 {
            let record = s / sh.samples_per_record;
            let within = s % sh.samples_per_record;
            let byte = (record * self.record_len + offset_in_record + within) * 2;
            out.push(i16::from_le_bytes([self.data[byte], self.data[byte + 1]]));
        }
        out
    }

    /// Read the montage channels over `[t0, t1)` seconds, calibrated to
    /// physical units and linearly resampled to `target_fs`.
    ///
    /// Channels are returned in montage order. After resampling, all channels
    /// are truncated to the shortest so the result is rectangular.
    pub fn read_channels(
        &self,
        montage: &[String],
        t0: f64,
        t1: f64,
        target_fs: f64,
    ) -> Result<Recording> {
        if montage.is_empty() {
            return Err(Error::EmptyInput("montage"));
        }
        let dur = self.duration_s();
        // Half a sample of slack at the configured rate absorbs rounding in
        // manifest stop times.
        let slack = 0.5 / target_fs;
        if !(t1 > t0) || t0 < -slack || t1 > dur + slack {
            return Err(Error::WindowOutOfRange {
                t0,
                t1,
                dur,
                path: self.path.clone(),
            });
        }
        let t0 = t0.max(0.0);
        let t1 = t1.min(dur);

        let mut channels = Vec::with_capacity(montage.len());
        for label in montage {
            let sig = self
                .signal_index(label)
                .ok_or_else(|| Error::MissingChannel {
                    label: label.clone(),
                    path: self.path.clone(),
                })?;
            let sh = &self.signals[sig];
            let rate = sh.sampling_rate(self.header.record_duration);
            let digital = self.digital_window(sig, t0, t1);
            if digital.is_empty() {
                return Err(Error::WindowOutOfRange {
                    t0,
                    t1,
                    dur,
                    path: self.path.clone(),
                });
            }
            let physical: Vec<f64> = digital.iter().map(|&d| sh.to_physical(d)).collect();
            channels.push(resample_linear(&physical, rate, target_fs)?);
        }

        let min_len = channels.iter().map(Vec::len).min().unwrap_or(0);
        for ch in &mut channels {
            ch.truncate(min_len);
        }

        Ok(Recording {
            channels: montage.to_vec(),
            fs: target_fs,
            samples: channels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-assemble a header-only EDF byte blob.
    fn header_bytes(num_signals: usize, header_bytes_field: Option<usize>) -> Vec<u8> {
        let mut raw = Vec::new();
        let push = |raw: &mut Vec<u8>, s: &str, w: usize| {
            let mut field = s.as_bytes().to_vec();
            assert!(field.len() <= w);
            field.resize(w, b' ');
            raw.extend_from_slice(&field);
        };
        push(&mut raw, "0", 8);
        push(&mut raw, "patient", 80);
        push(&mut raw, "recording", 80);
        push(&mut raw, "01.01.00", 8);
        push(&mut raw, "00.00.00", 8);
        let hb = header_bytes_field.unwrap_or(256 + 256 * num_signals);
        push(&mut raw, &hb.to_string(), 8);
        push(&mut raw, "", 44);
        push(&mut raw, "1", 8);
        push(&mut raw, "1", 8);
        push(&mut raw, &num_signals.to_string(), 4);
        for i in 0..num_signals {
            push(&mut raw, &format!("EEG CH{i:02}-REF"), 16);
        }
        for _ in 0..num_signals {
            push(&mut raw, "", 80);
        }
        for _ in 0..num_signals {
            push(&mut raw, "uV", 8);
        }
        for _ in 0..num_signals {
            push(&mut raw, "-3276.8", 8);
        }
        for _ in 0..num_signals {
            push(&mut raw, "3276.7", 8);
        }
        for _ in 0..num_signals {
            push(&mut raw, "-32768", 8);
        }
        for _ in 0..num_signals {
            push(&mut raw, "32767", 8);
        }
        for _ in 0..num_signals {
            push(&mut raw, "", 80);
        }
        for _ in 0..num_signals {
            push(&mut raw, "250", 8);
        }
        for _ in 0..num_signals {
            push(&mut raw, "", 32);
        }
        raw
    }

    #[test]
    fn parses_minimal_single_signal_header() {
        let raw = header_bytes(1, None);
        let (h, sigs) = parse_edf_header(&raw).unwrap();
        assert_eq!(h.num_signals, 1);
        assert_eq!(h.record_duration, 1.0);
        assert_eq!(h.num_records, 1);
        assert_eq!(h.header_bytes, 512);
        assert_eq!(sigs.len(), 1);
        assert_eq!(sigs[0].label, "EEG CH00-REF");
        assert_eq!(sigs[0].samples_per_record, 250);
        assert_eq!(sigs[0].sampling_rate(h.record_duration), 250.0);
    }

    #[test]
    fn header_size_mismatch_is_an_error() {
        let raw = header_bytes(1, Some(999));
        match parse_edf_header(&raw) {
            Err(Error::EdfFormat { msg, .. }) => assert!(msg.contains("header size mismatch")),
            other => panic!("expected header size mismatch, got {other:?}"),
        }
    }

    #[test]
    fn truncated_header_is_an_error() {
        let raw = header_bytes(1, None);
        assert!(parse_edf_header(&raw[..200]).is_err());
        assert!(parse_edf_header(&raw[..300]).is_err());
    }

    #[test]
    fn non_numeric_field_is_an_error() {
        let mut raw = header_bytes(1, None);
        raw[236..244].copy_from_slice(b"oops    ");
        match parse_edf_header(&raw) {
            Err(Error::EdfFormat { msg, .. }) => assert!(msg.contains("record count")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equal_digital_bounds_rejected() {
        let mut raw = header_bytes(1, None);
        // digital min field of signal 0 sits at 256 + 120*ns.
        raw[256 + 120..256 + 128].copy_from_slice(b"32767   ");
        match parse_edf_header(&raw) {
            Err(Error::EdfFormat { msg, .. }) => assert!(msg.contains("digital range")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn edf_plus_d_rejected() {
        let mut raw = header_bytes(1, None);
        raw[192..197].copy_from_slice(b"EDF+D");
        match parse_edf_header(&raw) {
            Err(Error::EdfFormat { msg, .. }) => assert!(msg.contains("EDF+D")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn annotation_channel_rejected() {
        let mut raw = header_bytes(1, None);
        let mut label = b"EDF Annotations".to_vec();
        label.resize(16, b' ');
        raw[256..272].copy_from_slice(&label);
        match parse_edf_header(&raw) {
            Err(Error::EdfFormat { msg, .. }) => assert!(msg.contains("annotation")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn calibration_maps_digital_to_physical() {
        let sh = SignalHeader {
            label: "X".into(),
            transducer: String::new(),
            physical_dimension: "uV".into(),
            physical_min: -3276.8,
            physical_max: 3276.7,
            digital_min: -32768,
            digital_max: 32767,
            prefilter: String::new(),
            samples_per_record: 250,
        };
        assert!((sh.to_physical(100) - 10.0).abs() < 1e-9);
        assert_eq!(sh.to_physical(-32768), -3276.8);
    }

    #[test]
    fn missing_montage_channel_is_named() {
        let mut raw = header_bytes(2, None);
        // 2 signals, 1 record of 250 samples each, all zeros.
        raw.extend_from_slice(&vec![0u8; 2 * 250 * 2]);
        let edf = EdfFile::from_bytes(raw, "mem.edf".into()).unwrap();
        let montage = vec!["EEG FP1-REF".to_string()];
        match edf.read_channels(&montage, 0.0, 1.0, 250.0) {
            Err(Error::MissingChannel { label, .. }) => assert_eq!(label, "EEG FP1-REF"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_native_rates_resample_to_a_common_grid() {
        // Signal 0 at 250 Hz, signal 1 at 200 Hz, both linear ramps.
        let mut raw = header_bytes(2, None);
        raw[256 + 216 * 2 + 8..256 + 216 * 2 + 16].copy_from_slice(b"200     ");
        for t in 0..250i16 {
            raw.extend_from_slice(&t.to_le_bytes());
        }
        for t in 0..200i16 {
            raw.extend_from_slice(&(10 * t).to_le_bytes());
        }
        let edf = EdfFile::from_bytes(raw, "mem.edf".into()).unwrap();
        assert_eq!(
            edf.signals[1].sampling_rate(edf.header.record_duration),
            200.0
        );

        let montage = vec!["EEG CH00-REF".to_string(), "EEG CH01-REF".to_string()];
        let rec = edf.read_channels(&montage, 0.0, 1.0, 250.0).unwrap();
        assert_eq!(rec.fs, 250.0);
        assert_eq!(rec.samples[0].len(), rec.samples[1].len());
        assert_eq!(rec.samples[0].len(), 250);
        // Channel 1's ramp is preserved under linear resampling: digital
        // slope 10/sample at 200 Hz = 2000/s, i.e. 8 digital units per
        // 250 Hz step, scaled by 0.1 uV per unit.
        let step = rec.samples[1][11] - rec.samples[1][10];
        assert!((step - 0.8).abs() < 1e-9, "step {step}");
    }

    #[test]
    fn unknown_record_count_is_inferred_from_the_size() {
        let mut raw = header_bytes(1, None);
        raw[236..244].copy_from_slice(b"-1      ");
        raw.extend_from_slice(&vec![0u8; 3 * 250 * 2]); // 3 records
        let edf = EdfFile::from_bytes(raw, "mem.edf".into()).unwrap();
        assert_eq!(edf.header.num_records, -1);
        assert_eq!(edf.duration_s(), 3.0);
        let montage = vec!["EEG CH00-REF".to_string()];
        let rec = edf.read_channels(&montage, 0.0, 3.0, 250.0).unwrap();
        assert_eq!(rec.samples[0].len(), 750);
    }

    #[test]
    fn out_of_range_window_rejected() {
        let mut raw = header_bytes(1, None);
        raw.extend_from_slice(&vec![0u8; 250 * 2]);
        let edf = EdfFile::from_bytes(raw, "mem.edf".into()).unwrap();
        let montage = vec!["EEG CH00-REF".to_string()];
        assert!(matches!(
            edf.read_channels(&montage, 0.0, 2.0, 250.0),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(matches!(
            edf.read_channels(&montage, 0.8, 0.2, 250.0),
            Err(Error::WindowOutOfRange { .. })
        ));
    }
}
