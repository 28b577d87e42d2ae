//! Seizure manifest CSV: one labeled event per row.
//!
//! Schema (UTF-8, header row exactly):
//! `patient_id,session_id,file_path,start_s,stop_s,type`
//!
//! Lines starting with `#` before the header are metadata; `# version: TAG`
//! sets the manifest version tag. Rows labeled MYSZ are counted and skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::ingest::{SeizureEvent, SeizureType};

pub const MANIFEST_HEADER: &str = "patient_id,session_id,file_path,start_s,stop_s,type";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub event: SeizureEvent,
    pub file_path: String,
}

/// A parsed seizure manifest. Entry order is preserved; the entry index is
/// the seizure id used by featurization and fold allocation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    pub version: String,
    /// MYSZ rows dropped during parsing.
    pub mysz_skipped: usize,
}

impl Manifest {
    pub fn events(&self) -> Vec<SeizureEvent> {
        self.entries.iter().map(|e| e.event.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let mut version = String::new();
    let mut body_start = 0;
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            if let Some(v) = trimmed
                .trim_start_matches('#')
                .trim()
                .strip_prefix("version:")
            {
                version = v.trim().to_string();
            }
            body_start += line.len() + 1;
        } else {
            break;
        }
    }
    let comment_lines = text[..body_start].lines().count();
    let body = &text[body_start.min(text.len())..];

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());

    {
        let headers = reader.headers().map_err(|e| Error::ManifestParse {
            line: comment_lines + 1,
            msg: e.to_string(),
        })?;
        let joined = headers.iter().collect::<Vec<_>>().join(",");
        if joined != MANIFEST_HEADER {
            return Err(Error::ManifestParse {
                line: comment_lines + 1,
                msg: format!("header row {joined:?}, expected {MANIFEST_HEADER:?}"),
            });
        }
    }

    let mut manifest = Manifest {
        version,
        ..Manifest::default()
    };
    // (patient, session) -> path must be a function; events must be unique.
    let mut session_paths: HashMap<(String, String), String> = HashMap::new();
    let mut seen_events: BTreeSet<(String, String, u64, u64)> = BTreeSet::new();

    for record in reader.records() {
        let record = record.map_err(|e| Error::ManifestParse {
            line: e.position().map_or(0, |p| p.line() as usize) + comment_lines,
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize) + comment_lines;
        let err = |msg: String| Error::ManifestParse { line, msg };

        if record.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", record.len())));
        }
        let patient_id = record[0].to_string();
        let session_id = record[1].to_string();
        let file_path = record[2].to_string();
        let start_s: f64 = record[3]
            .parse()
            .map_err(|_| err(format!("bad start_s {:?}", &record[3])))?;
        let stop_s: f64 = record[4]
            .parse()
            .map_err(|_| err(format!("bad stop_s {:?}", &record[4])))?;
        if patient_id.is_empty() || session_id.is_empty() || file_path.is_empty() {
            return Err(err("empty patient_id, session_id or file_path".into()));
        }
        if !start_s.is_finite() || !stop_s.is_finite() || start_s < 0.0 {
            return Err(err(format!("bad time interval [{start_s}, {stop_s}]")));
        }
        if stop_s <= start_s {
            return Err(err(format!(
                "stop {stop_s} must be greater than start {start_s}"
            )));
        }

        let ty = match SeizureType::parse_code(&record[5])? {
            Some(ty) => ty,
            None => {
                manifest.mysz_skipped += 1;
                log::warn!("manifest line {line}: skipping out-of-scope MYSZ event");
                continue;
            }
        };

        let key = (patient_id.clone(), session_id.clone());
        if let Some(prev) = session_paths.get(&key) {
            if prev != &file_path {
                return Err(err(format!(
                    "session ({patient_id}, {session_id}) maps to both {prev:?} and {file_path:?}"
                )));
            }
        } else {
            session_paths.insert(key, file_path.clone());
        }

        let event_key = (
            patient_id.clone(),
            file_path.clone(),
            start_s.to_bits(),
            stop_s.to_bits(),
        );
        if !seen_events.insert(event_key) {
            return Err(err(format!(
                "duplicate event: {patient_id} {file_path} [{start_s}, {stop_s}]"
            )));
        }

        manifest.entries.push(ManifestEntry {
            event: SeizureEvent {
                patient_id,
                session_id,
                start_s,
                stop_s,
                ty,
            },
            file_path,
        });
    }

    Ok(manifest)
}

pub fn serialize_manifest(manifest: &Manifest) -> String {
    let mut out = String::new();
    if !manifest.version.is_empty() {
        out.push_str(&format!("# version: {}\n", manifest.version));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(MANIFEST_HEADER.split(','))
        .expect("header write");
    for entry in &manifest.entries {
        let e = &entry.event;
        writer
            .write_record([
                e.patient_id.as_str(),
                e.session_id.as_str(),
                entry.file_path.as_str(),
                &e.start_s.to_string(),
                &e.stop_s.to_string(),
                e.ty.code(),
            ])
            .expect("record write");
    }
    out.push_str(&String::from_utf8(writer.into_inner().expect("csv flush")).expect("utf8"));
    out
}

/// Per-type seizure count, total duration and distinct patient count.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TypeStats {
    #[serde(rename = "type")]
    pub ty: SeizureType,
    pub n_seizures: usize,
    pub duration_s: f64,
    pub n_patients: usize,
}

/// Dataset statistics, one row per seizure type present, sorted by
/// descending seizure count (ties: descending duration, then type code).
pub fn dataset_stats(manifest: &Manifest) -> Result<Vec<TypeStats>> {
    if manifest.is_empty() {
        return Err(Error::EmptyInput("manifest"));
    }
    let mut counts: BTreeMap<SeizureType, (usize, f64, BTreeSet<&str>)> = BTreeMap::new();
    for entry in &manifest.entries {
        let e = &entry.event;
        let slot = counts
            .entry(e.ty)
            .or_insert_with(|| (0, 0.0, BTreeSet::new()));
        slot.0 += 1;
        slot.1 += e.duration_s();
        slot.2.insert(e.patient_id.as_str());
    }
    let mut rows: Vec<TypeStats> = counts
        .into_iter()
        .map(|(ty, (n, dur, patients))| TypeStats {
            ty,
            n_seizures: n,
            duration_s: dur,
            n_patients: patients.len(),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.n_seizures
            .cmp(&a.n_seizures)
            .then(
                b.duration_s
                    .partial_cmp(&a.duration_s)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then(a.ty.code().cmp(b.ty.code()))
    });
    Ok(rows)
}

/// CSV rendering: `type,n_seizures,duration_s,n_patients`.
pub fn stats_csv(rows: &[TypeStats]) -> String {
    let mut out = String::from("type,n_seizures,duration_s,n_patients\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.ty.code(),
            r.n_seizures,
            r.duration_s,
            r.n_patients
        ));
    }
    out
}

/// Aligned plain-text table with the long type names.
pub fn render_stats_table(rows: &[TypeStats]) -> String {
    let headers = [
        "Seizure Type",
        "Seizure Number",
        "Duration (Seconds)",
        "Patient Number",
    ];
    let body: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.ty.long_name().to_string(),
                r.n_seizures.to_string(),
                format!("{:.0}", r.duration_s),
                r.n_patients.to_string(),
            ]
        })
        .collect();
    let mut widths = headers.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: [&str; 4]| -> String {
        format!(
            "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}\n",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3],
        )
    };
    out.push_str(&fmt_row(headers));
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 6));
    out.push('\n');
    for row in &body {
        out.push_str(&fmt_row([&row[0], &row[1], &row[2], &row[3]]));
    }
    out
}
