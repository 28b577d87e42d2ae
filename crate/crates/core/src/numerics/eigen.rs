//! Eigenvalues of real symmetric matrices via cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

/// Default off-diagonal Frobenius norm threshold for convergence.
pub const JACOBI_TOL: f64 = 1e-10;
/// Default sweep budget; plenty for the small matrices used here (N <= ~32).
pub const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigenvalues of a real symmetric matrix, unsorted.
///
/// The input must be symmetric within 1e-9 (max |a_ij - a_ji|); it is
/// symmetrized by averaging before iteration, so the result is exactly the
/// spectrum of `(A + A^T)/2`. Inputs further from symmetry are rejected
/// rather than silently projected.
pub fn sym_eigenvalues(a: &RealMatrix, tol: f64, max_sweeps: usize) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::spec(
            "eigenvalue input",
            format!("matrix is {}x{}, not square", a.rows(), a.cols()),
        ));
    }
    let dev = a.symmetry_deviation();
    if dev > 1e-9 {
        return Err(Error::NotSymmetric { deviation: dev });
    }

    let n = a.rows();
    if n == 0 {
        return Err(Error::EmptyInput("eigenvalue input"));
    }
    if n == 1 {
        return Ok(vec![a.get(0, 0)]);
    }

    // Work on the symmetrized copy.
    let mut m = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a.get(i, j) + a.get(j, i));
        }
    }

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..max_sweeps {
        if off_norm(&m) <= tol {
            return Ok((0..n).map(|i| m[i * n + i]).collect());
        }
        // One cyclic sweep: annihilate every (p, q) pair in turn.
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                // Smaller-magnitude tangent root keeps rotations stable.
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }

    let off = off_norm(&m);
    if off <= tol {
        Ok((0..n).map(|i| m[i * n + i]).collect())
    } else {
        Err(Error::NonConvergence {
            sweeps: max_sweeps,
            off_norm: off,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = sym_eigenvalues(&RealMatrix::identity(4), JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
        for v in eig {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix_returns_diagonal() {
        let a = RealMatrix::new(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let eig = sorted(sym_eigenvalues(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap());
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn matches_independent_eigensolver() {
        let n = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        let a = RealMatrix::new(n, n, data.clone()).unwrap();
        let ours = sorted(sym_eigenvalues(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap());

        let na = nalgebra::DMatrix::from_row_slice(n, n, &data);
        let reference = sorted(na.symmetric_eigen().eigenvalues.as_slice().to_vec());

        for (x, y) in ours.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn trace_identity_holds() {
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-2.0..2.0);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        let a = RealMatrix::new(n, n, data).unwrap();
        let eig = sym_eigenvalues(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
        let sum: f64 = eig.iter().sum();
        assert!((sum - a.trace()).abs() < 1e-8 * n as f64);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = RealMatrix::new(2, 2, vec![1.0, 0.5, 0.0, 1.0]).unwrap();
        match sym_eigenvalues(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS) {
            Err(Error::NotSymmetric { deviation }) => assert!((deviation - 0.5).abs() < 1e-12),
            other => panic!("expected NotSymmetric, got {other:?}"),
        }
    }

    #[test]
    fn non_convergence_reports_off_norm() {
        let a = RealMatrix::new(2, 2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        match sym_eigenvalues(&a, 1e-10, 0) {
            Err(Error::NonConvergence { off_norm, .. }) => assert!(off_norm > 0.0),
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    proptest::proptest! {
        // Correlation matrices are positive semidefinite up to tolerance and
        // their spectrum sums to N when every row has variance.
        #[test]
        fn correlation_spectrum_is_psd_with_trace_n(
            seed in 0u64..500,
            n in 2usize..8,
            t in 4usize..20,
        ) {
            use crate::numerics::pearson_correlation;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f64> = (0..n * t).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let x = RealMatrix::new(n, t, data).unwrap();
            let corr = pearson_correlation(&x).unwrap();
            let eig = sym_eigenvalues(&corr, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
            for v in &eig {
                proptest::prop_assert!(*v >= -1e-8, "negative eigenvalue {v}");
            }
            let sum: f64 = eig.iter().sum();
            proptest::prop_assert!((sum - n as f64).abs() < 1e-6);
        }
    }
}
