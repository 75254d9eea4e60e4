//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Cholesky factorization of a symmetric positive-definite matrix, with a
/// single retry after adding `1e-10 * trace / m` of diagonal jitter when
/// the plain factorization fails.
pub struct SpdSolver {
    chol: Cholesky<f64, Dyn>,
    jittered: bool,
}

impl SpdSolver {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let m = mat.nrows();
        if m != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "SPD solve needs a square matrix, got {}x{}",
                m,
                mat.ncols()
            )));
        }
        if let Some(chol) = Cholesky::new(mat.clone()) {
            return Ok(SpdSolver { chol, jittered: false });
        }
        let jitter = 1e-10 * mat.trace() / m as f64;
        if jitter > 0.0 {
            let mut jm = mat;
            for i in 0..m {
                jm[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(jm) {
                return Ok(SpdSolver { chol, jittered: true });
            }
        }
        Err(Error::IllPosed(
            "matrix is not positive definite, even after jitter".into(),
        ))
    }

    pub fn jittered(&self) -> bool {
        self.jittered
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn solve_mat(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }

    /// log det of the factored matrix.
    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }
}

/// Largest eigenvalue of `Aᵀ A` by power iteration on `v → Aᵀ(Av)`.
pub fn largest_sq_singular_value(a: &DMatrix<f64>, iters: usize, tol: f64) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // Deterministic, non-degenerate start vector.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sin() * 0.01);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = a.tr_mul(&(a * &v));
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm; // Rayleigh quotient for unit v
        v = w / norm;
        if (next - lambda).abs() <= tol * next.max(1.0) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// Singular values in decreasing order.
pub fn singular_values_desc(a: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}
