//! Feature rows plus their provenance columns.

use crate::error::{Error, Result};
use crate::ingest::SeizureType;

/// Provenance of one feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub label: SeizureType,
    /// Index into [`FeatureMatrix::patients`].
    pub patient: u32,
    /// Manifest entry index of the originating seizure.
    pub seizure_id: u32,
    /// Window start in seconds, absolute within the source file.
    pub window_start_s: f64,
}

/// Dense feature matrix with per-row label, patient and seizure provenance.
///
/// Patient ids are interned: rows store an index into the `patients` table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    d: usize,
    features: Vec<f64>,
    rows: Vec<FeatureRow>,
    patients: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row_features(&self, row: usize) -> &[f64] {
        &self.features[row * self.d..(row + 1) * self.d]
    }

    pub fn row(&self, row: usize) -> &FeatureRow {
        &self.rows[row]
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn patients(&self) -> &[String] {
        &self.patients
    }

    pub fn patient_of_row(&self, row: usize) -> &str {
        &self.patients[self.rows[row].patient as usize]
    }

    pub fn intern_patient(&mut self, id: &str) -> u32 {
        if let Some(pos) = self.patients.iter().position(|p| p == id) {
            pos as u32
        } else {
            self.patients.push(id.to_string());
            (self.patients.len() - 1) as u32
        }
    }

    pub fn push_row(
        &mut self,
        features: &[f64],
        label: SeizureType,
        patient: u32,
        seizure_id: u32,
        window_start_s: f64,
    ) -> Result<()> {
        if features.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: features.len(),
            });
        }
        if patient as usize >= self.patients.len() {
            return Err(Error::spec(
                "feature row",
                format!("patient index {patient} not interned"),
            ));
        }
        self.features.extend_from_slice(features);
        self.rows.push(FeatureRow {
            label,
            patient,
            seizure_id,
            window_start_s,
        });
        Ok(())
    }

    /// Class ids of all rows, in row order.
    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label.class_id()).collect()
    }

    /// Restore from raw parts (cache deserialization).
    pub(crate) fn from_parts(
        d: usize,
        features: Vec<f64>,
        rows: Vec<FeatureRow>,
        patients: Vec<String>,
    ) -> Result<Self> {
        if features.len() != d * rows.len() {
            return Err(Error::DimensionMismatch {
                expected: d * rows.len(),
                got: features.len(),
            });
        }
        for r in &rows {
            if r.patient as usize >= patients.len() {
                return Err(Error::spec(
                    "feature matrix",
                    format!("patient index {} out of range", r.patient),
                ));
            }
        }
        Ok(Self {
            d,
            features,
            rows,
            patients,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_deduplicates() {
        let mut fm = FeatureMatrix::new(2);
        let a = fm.intern_patient("p01");
        let b = fm.intern_patient("p02");
        let again = fm.intern_patient("p01");
        assert_eq!(a, again);
        assert_ne!(a, b);
        assert_eq!(fm.patients(), &["p01".to_string(), "p02".to_string()]);
    }

    #[test]
    fn push_checks_dimension() {
        let mut fm = FeatureMatrix::new(3);
        let p = fm.intern_patient("p01");
        assert!(fm
            .push_row(&[1.0, 2.0], SeizureType::Fnsz, p, 0, 0.0)
            .is_err());
        assert!(fm
            .push_row(&[1.0, 2.0, 3.0], SeizureType::Fnsz, p, 0, 0.0)
            .is_ok());
        assert_eq!(fm.num_rows(), 1);
        assert_eq!(fm.row_features(0), &[1.0, 2.0, 3.0]);
    }
}
