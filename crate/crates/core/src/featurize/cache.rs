//! Binary on-disk feature cache (SZFT format).
//!
//! Layout, little-endian:
//!
//! ```text
//! magic "SZFT" | version u16 | method u8 | f_max u16 | W_l f32 | O f32
//! | montage-hash u64 | D u32 | row count u64
//! then per row: label u8 | patient u32 | seizure u32 | window-start f64
//!               | D x f64 features
//! then the interned patient table: count u32, then per entry len u16 + UTF-8
//! ```
//!
//! Method-1 feature vectors are channel-major: N contiguous blocks of B
//! band magnitudes, so consumers can reshape a row to (N, B).

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, FeatureRow, FeatureSpec, Method, WindowSpec};
use crate::ingest::SeizureType;

const MAGIC: &[u8; 4] = b"SZFT";
const VERSION: u16 = 1;

/// Self-describing cache header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheMeta {
    pub method: Method,
    pub f_max: u16,
    pub w_l: f32,
    pub o: f32,
    pub montage_hash: u64,
    pub d: u32,
    pub rows: u64,
}

/// FNV-1a (64-bit) over the montage labels joined with `\n`.
pub fn montage_hash(labels: &[String]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    for (i, label) in labels.iter().enumerate() {
        if i > 0 {
            feed(b"\n");
        }
        feed(label.as_bytes());
    }
    hash
}

fn f_max_as_u16(f_max: f64) -> Result<u16> {
    if f_max.fract() != 0.0 || !(1.0..=65535.0).contains(&f_max) {
        return Err(Error::spec(
            "feature cache",
            format!("f_max = {f_max} must be an integer number of Hz to be cached"),
        ));
    }
    Ok(f_max as u16)
}

pub fn write_cache(
    path: impl AsRef<Path>,
    features: &FeatureMatrix,
    window: &WindowSpec,
    spec: &FeatureSpec,
    montage: &[String],
) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let mut buf: Vec<u8> = Vec::with_capacity(64 + features.num_rows() * (17 + features.dim() * 8));

    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(spec.method.as_u8());
    buf.extend_from_slice(&f_max_as_u16(spec.f_max)?.to_le_bytes());
    buf.extend_from_slice(&(window.w_l as f32).to_le_bytes());
    buf.extend_from_slice(&(window.o as f32).to_le_bytes());
    buf.extend_from_slice(&montage_hash(montage).to_le_bytes());
    buf.extend_from_slice(&(features.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(features.num_rows() as u64).to_le_bytes());

    for i in 0..features.num_rows() {
        let row = features.row(i);
        buf.push(row.label.class_id());
        buf.extend_from_slice(&row.patient.to_le_bytes());
        buf.extend_from_slice(&row.seizure_id.to_le_bytes());
        buf.extend_from_slice(&row.window_start_s.to_le_bytes());
        for v in features.row_features(i) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    buf.extend_from_slice(&(features.patients().len() as u32).to_le_bytes());
    for p in features.patients() {
        let bytes = p.as_bytes();
        buf.extend_from_slice(&(bytes.len() as u16).to_le_bytes());
        buf.extend_from_slice(bytes);
    }

    let mut file = fs::File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    file.write_all(&buf).map_err(|e| Error::io(&path_str, e))?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(Error::CacheTruncated {
                path: self.path.to_string(),
                msg: format!("{what} needs {n} bytes at offset {}", self.pos),
            });
        }
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Read a cache file, returning the features and the header it describes.
pub fn read_cache(path: impl AsRef<Path>) -> Result<(FeatureMatrix, CacheMeta)> {
    let path_str = path.as_ref().display().to_string();
    let buf = fs::read(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut cur = Cursor {
        buf: &buf,
        pos: 0,
        path: &path_str,
    };

    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::CacheVersion { path: path_str });
    }
    let version = cur.u16("version")?;
    if version != VERSION {
        return Err(Error::CacheVersion { path: path_str });
    }

    let method =
        Method::try_from(cur.u8("method")?).map_err(|msg| Error::spec("feature cache", msg))?;
    let meta = CacheMeta {
        method,
        f_max: cur.u16("f_max")?,
        w_l: cur.f32("W_l")?,
        o: cur.f32("O")?,
        montage_hash: cur.u64("montage hash")?,
        d: cur.u32("D")?,
        rows: cur.u64("row count")?,
    };

    let d = meta.d as usize;
    let n_rows = meta.rows as usize;
    let mut features = Vec::with_capacity(n_rows * d);
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let label_id = cur.u8("row label")?;
        let label = SeizureType::from_class_id(label_id).ok_or_else(|| {
            Error::spec("feature cache", format!("label id {label_id} out of range"))
        })?;
        let patient = cur.u32("row patient")?;
        let seizure_id = cur.u32("row seizure id")?;
        let window_start_s = cur.f64("row window start")?;
        let raw = cur.take(d * 8, "row features")?;
        for chunk in raw.chunks_exact(8) {
            features.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        rows.push(FeatureRow {
            label,
            patient,
            seizure_id,
            window_start_s,
        });
    }

    let n_patients = cur.u32("patient table size")? as usize;
    let mut patients = Vec::with_capacity(n_patients);
    for _ in 0..n_patients {
        let len = cur.u16("patient id length")? as usize;
        let bytes = cur.take(len, "patient id")?;
        patients
            .push(String::from_utf8(bytes.to_vec()).map_err(|_| {
                Error::spec("feature cache", "patient id is not UTF-8".to_string())
            })?);
    }

    Ok((
        FeatureMatrix::from_parts(d, features, rows, patients)?,
        meta,
    ))
}

/// Read a cache file and verify it matches the expected specs.
pub fn read_cache_expect(
    path: impl AsRef<Path>,
    window: &WindowSpec,
    spec: &FeatureSpec,
    montage: &[String],
) -> Result<(FeatureMatrix, CacheMeta)> {
    let path_str = path.as_ref().display().to_string();
    let (features, meta) = read_cache(path)?;
    let mismatch = |field: &'static str, expected: String, found: String| Error::SpecMismatch {
        path: path_str.clone(),
        field,
        expected,
        found,
    };
    if meta.method != spec.method {
        return Err(mismatch(
            "method",
            spec.method.to_string(),
            meta.method.to_string(),
        ));
    }
    let expected_fmax = f_max_as_u16(spec.f_max)?;
    if meta.f_max != expected_fmax {
        return Err(mismatch(
            "f_max",
            expected_fmax.to_string(),
            meta.f_max.to_string(),
        ));
    }
    if meta.w_l != window.w_l as f32 {
        return Err(mismatch(
            "W_l",
            window.w_l.to_string(),
            meta.w_l.to_string(),
        ));
    }
    if meta.o != window.o as f32 {
        return Err(mismatch("O", window.o.to_string(), meta.o.to_string()));
    }
    let expected_hash = montage_hash(montage);
    if meta.montage_hash != expected_hash {
        return Err(mismatch(
            "montage hash",
            format!("{expected_hash:016x}"),
            format!("{:016x}", meta.montage_hash),
        ));
    }
    Ok((features, meta))
}
