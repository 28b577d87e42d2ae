//! Pearson correlation across the rows of a matrix.

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

/// Pearson correlation matrix over the rows of `x` (rows are variables,
/// columns observations).
///
/// Zero-variance rows get 0 off-diagonal entries and a unit diagonal, so the
/// output is always well-formed. Entries may exceed [-1, 1] by at most
/// rounding noise (~1e-12); they are not clamped.
pub fn pearson_correlation(x: &RealMatrix) -> Result<RealMatrix> {
    let n = x.rows();
    let t = x.cols();
    if t < 2 {
        return Err(Error::spec(
            "correlation input",
            format!("needs at least 2 columns, got {t}"),
        ));
    }

    let means: Vec<f64> = (0..n)
        .map(|i| x.row(i).iter().sum::<f64>() / t as f64)
        .collect();
    // Centered rows and their L2 norms; norm 0 marks a degenerate row.
    let centered: Vec<Vec<f64>> = (0..n)
        .map(|i| x.row(i).iter().map(|v| v - means[i]).collect())
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    let mut out = RealMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = if norms[i] > 0.0 && norms[j] > 0.0 {
                let dot: f64 = centered[i]
                    .iter()
                    .zip(&centered[j])
                    .map(|(a, b)| a * b)
                    .sum();
                dot / (norms[i] * norms[j])
            } else {
                0.0
            };
            out.set(i, j, r);
            out.set(j, i, r);
        }
    }
    Ok(out)
}
