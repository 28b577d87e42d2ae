//! EDF signal ingestion and seizure manifest handling.
//!
//! Parsing is pure per file; a [`Recording`] is immutable after construction
//! and safe to share across threads.

mod edf;
mod manifest;

pub use edf::{parse_edf_header, EdfFile, EdfHeader, SignalHeader};
pub use manifest::{
    dataset_stats, parse_manifest, render_stats_table, serialize_manifest, stats_csv, Manifest,
    ManifestEntry, TypeStats,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seven in-scope seizure type codes. MYSZ is rejected at parse time.
///
/// The discriminant order is the on-disk label encoding of the feature cache
/// (FNSZ=0 .. SPSZ=6) and must not be reordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeizureType {
    #[serde(rename = "FNSZ")]
    Fnsz = 0,
    #[serde(rename = "GNSZ")]
    Gnsz = 1,
    #[serde(rename = "CPSZ")]
    Cpsz = 2,
    #[serde(rename = "ABSZ")]
    Absz = 3,
    #[serde(rename = "TNSZ")]
    Tnsz = 4,
    #[serde(rename = "TCSZ")]
    Tcsz = 5,
    #[serde(rename = "SPSZ")]
    Spsz = 6,
}

impl SeizureType {
    pub const ALL: [SeizureType; 7] = [
        SeizureType::Fnsz,
        SeizureType::Gnsz,
        SeizureType::Cpsz,
        SeizureType::Absz,
        SeizureType::Tnsz,
        SeizureType::Tcsz,
        SeizureType::Spsz,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            SeizureType::Fnsz => "FNSZ",
            SeizureType::Gnsz => "GNSZ",
            SeizureType::Cpsz => "CPSZ",
            SeizureType::Absz => "ABSZ",
            SeizureType::Tnsz => "TNSZ",
            SeizureType::Tcsz => "TCSZ",
            SeizureType::Spsz => "SPSZ",
        }
    }

    pub fn long_name(&self) -> &'static str {
        match self {
            SeizureType::Fnsz => "Focal Non-Specific (FNSZ)",
            SeizureType::Gnsz => "Generalized Non-Specific (GNSZ)",
            SeizureType::Cpsz => "Complex Partial (CPSZ)",
            SeizureType::Absz => "Absence (ABSZ)",
            SeizureType::Tnsz => "Tonic (TNSZ)",
            SeizureType::Tcsz => "Tonic Clonic (TCSZ)",
            SeizureType::Spsz => "Simple Partial (SPSZ)",
        }
    }

    pub fn class_id(&self) -> u8 {
        *self as u8
    }

    pub fn from_class_id(id: u8) -> Option<SeizureType> {
        SeizureType::ALL.get(id as usize).copied()
    }

    /// Parse a 4-letter code. `Ok(None)` marks the out-of-scope MYSZ class,
    /// which callers count and skip rather than treat as an error.
    pub fn parse_code(code: &str) -> Result<Option<SeizureType>> {
        match code.trim().to_ascii_uppercase().as_str() {
            "FNSZ" => Ok(Some(SeizureType::Fnsz)),
            "GNSZ" => Ok(Some(SeizureType::Gnsz)),
            "CPSZ" => Ok(Some(SeizureType::Cpsz)),
            "ABSZ" => Ok(Some(SeizureType::Absz)),
            "TNSZ" => Ok(Some(SeizureType::Tnsz)),
            "TCSZ" => Ok(Some(SeizureType::Tcsz)),
            "SPSZ" => Ok(Some(SeizureType::Spsz)),
            "MYSZ" => Ok(None),
            other => Err(Error::UnknownSeizureType(other.to_string())),
        }
    }
}

impl std::fmt::Display for SeizureType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// One labeled seizure interval; the atom of fold allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeizureEvent {
    pub patient_id: String,
    pub session_id: String,
    pub start_s: f64,
    pub stop_s: f64,
    pub ty: SeizureType,
}

impl SeizureEvent {
    pub fn duration_s(&self) -> f64 {
        self.stop_s - self.start_s
    }
}

/// A multichannel signal clip in physical units (microvolts), all channels
/// sharing one sampling rate.
#[derive(Debug, Clone)]
pub struct Recording {
    /// Channel labels in montage order; length defines N.
    pub channels: Vec<String>,
    /// Common sampling rate in Hz.
    pub fs: f64,
    /// One sample vector per channel, all of equal length.
    pub samples: Vec<Vec<f64>>,
}

impl Recording {
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn duration_s(&self) -> f64 {
        self.num_samples() as f64 / self.fs
    }
}
