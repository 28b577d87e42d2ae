//! Small row-major real matrix.

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` entries.
///
/// NaN and infinite entries are rejected at construction so downstream
/// kernels never have to re-check.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Maximum absolute symmetry deviation `max |a_ij - a_ji|`.
    pub fn symmetry_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        dev
    }

    /// Strict upper triangle (diagonal excluded), row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows * (self.rows - 1) / 2);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            RealMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            RealMatrix::new(1, 2, vec![f64::INFINITY, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn rejects_size_mismatch() {
        assert!(RealMatrix::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn upper_triangle_row_major() {
        let m = RealMatrix::new(3, 3, vec![1., 2., 3., 4., 5., 6., 7., 8., 9.]).unwrap();
        assert_eq!(m.upper_triangle(), vec![2., 3., 6.]);
    }
}
