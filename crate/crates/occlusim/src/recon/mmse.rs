//! Closed-form Bayesian estimation under the Gaussian scene model.
//!
//! With `f ~ N(0, S)` and `y = A f + e`, `e ~ N(0, sigma^2 I)`, the
//! posterior mean is `S Aᵀ (A S Aᵀ + sigma^2 I)^{-1} y` and the posterior
//! covariance is `S - S Aᵀ (A S Aᵀ + sigma^2 I)^{-1} A S`.
//!
//! Solves go through a symmetric positive-definite factorization, never an
//! explicit inverse. For overdetermined batches (`M > N`) the identical
//! estimate is computed in the N-dimensional dual form
//! `B (W'W + sigma^2 I)^{-1} W' y` with `W = A B`, `B Bᵀ = S`, which both
//! avoids the large M-by-M system and sidesteps the numerically
//! rank-deficient prior covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SpdSolver;
use crate::stats::{GaussianPrior, ReflectivityField};

/// Posterior summary of one reconstruction.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    /// Posterior mean, aligned with the patch ordering.
    pub estimate: ReflectivityField,
    /// Square root of the posterior covariance diagonal.
    pub posterior_std: DVector<f64>,
    /// Predicted normalized error: `tr(posterior) / tr(prior)`.
    pub nmse: f64,
}

enum Route {
    /// Factorization of `A S Aᵀ + sigma^2 I` (M x M).
    Primal { solver: SpdSolver },
    /// Factorization of `WᵀW + sigma^2 I` (N x N), `W = A B`.
    Dual { solver: SpdSolver, w: DMatrix<f64>, sigma_sq: f64 },
}

fn factorize(a: &DMatrix<f64>, prior: &GaussianPrior, sigma_sq: f64) -> Result<Route> {
    let (m, n) = a.shape();
    if m == 0 {
        return Err(Error::Empty("operator has no rows".into()));
    }
    if n != prior.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {n} columns but the prior has {} entries",
            prior.len()
        )));
    }
    if sigma_sq.is_nan() || sigma_sq < 0.0 {
        return Err(Error::Config("noise variance must be >= 0".into()));
    }
    if m <= n || sigma_sq == 0.0 {
        let mut k = a * prior.covariance() * a.transpose();
        for i in 0..m {
            k[(i, i)] += sigma_sq;
        }
        let solver = SpdSolver::new(k).map_err(|_| {
            Error::IllPosed(
                "A S Aᵀ + sigma^2 I is singular; the system is ill-posed at this noise level"
                    .into(),
            )
        })?;
        Ok(Route::Primal { solver })
    } else {
        let w = a * prior.factor();
        let mut g = w.tr_mul(&w);
        for i in 0..n {
            g[(i, i)] += sigma_sq;
        }
        let solver = SpdSolver::new(g)?;
        Ok(Route::Dual { solver, w, sigma_sq })
    }
}

impl Route {
    fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        match self {
            Route::Primal { solver } => solver.solve_vec(y),
            Route::Dual { solver, w, sigma_sq } => {
                let wty = w.tr_mul(y);
                let inner = solver.solve_vec(&wty);
                (y - w * inner) / *sigma_sq
            }
        }
    }

    fn quad_form(&self, y: &DVector<f64>) -> f64 {
        y.dot(&self.apply_inverse(y))
    }

    fn log_det(&self, m: usize, n: usize) -> f64 {
        match self {
            Route::Primal { solver } => solver.log_det(),
            Route::Dual { solver, sigma_sq, .. } => {
                solver.log_det() + (m as f64 - n as f64) * sigma_sq.ln()
            }
        }
    }

    /// Diagonal and trace of the posterior covariance.
    fn posterior_diag(&self, a: &DMatrix<f64>, prior: &GaussianPrior) -> DVector<f64> {
        match self {
            Route::Primal { solver } => {
                let b = a * prior.covariance(); // M x N
                let x = solver.solve_mat(&b);
                DVector::from_fn(prior.len(), |j, _| {
                    let mut acc = prior.covariance()[(j, j)];
                    for i in 0..a.nrows() {
                        acc -= b[(i, j)] * x[(i, j)];
                    }
                    acc
                })
            }
            Route::Dual { solver, sigma_sq, .. } => {
                let l = prior.factor();
                let x = solver.solve_mat(&l.transpose()); // N x N
                DVector::from_fn(prior.len(), |j, _| {
                    let mut acc = 0.0;
                    for k in 0..l.ncols() {
                        acc += l[(j, k)] * x[(k, j)];
                    }
                    acc * sigma_sq
                })
            }
        }
    }
}

/// Posterior-mean reconstruction with per-patch uncertainty and the
/// predicted NMSE.
pub fn mmse(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    prior: &GaussianPrior,
    sigma_sq: f64,
) -> Result<ReconstructionResult> {
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} rows but y has {} entries",
            a.nrows(),
            y.len()
        )));
    }
    let route = factorize(a, prior, sigma_sq)?;
    let inv_y = route.apply_inverse(y);
    let estimate = prior.covariance() * a.tr_mul(&inv_y);
    let diag = route.posterior_diag(a, prior);
    let nmse = diag.sum() / prior.trace();
    let posterior_std = diag.map(|d| d.max(0.0).sqrt());
    Ok(ReconstructionResult { estimate, posterior_std, nmse })
}

/// The NMSE the operator will achieve, computable before any measurement:
/// `tr(S - S Aᵀ (A S Aᵀ + sigma^2 I)^{-1} A S) / tr(S)`.
pub fn nmse_predict(a: &DMatrix<f64>, prior: &GaussianPrior, sigma_sq: f64) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(1.0);
    }
    let route = factorize(a, prior, sigma_sq)?;
    Ok(route.posterior_diag(a, prior).sum() / prior.trace())
}

/// The data-fit quadratic form `yᵀ (A S Aᵀ + sigma^2 I)^{-1} y` used by the
/// unknown-distance search.
pub fn measurement_quad_form(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    prior: &GaussianPrior,
    sigma_sq: f64,
) -> Result<f64> {
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} rows but y has {} entries",
            a.nrows(),
            y.len()
        )));
    }
    Ok(factorize(a, prior, sigma_sq)?.quad_form(y))
}

/// Negative log evidence of `y` under the Gaussian model. With
/// `include_log_det = false` this is the bare quadratic form; with `true`
/// it is `log det(A S Aᵀ + sigma^2 I) / 2 + quad / 2`, the complete
/// y-dependent evidence up to an additive constant.
pub fn gaussian_nll(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    prior: &GaussianPrior,
    sigma_sq: f64,
    include_log_det: bool,
) -> Result<f64> {
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} rows but y has {} entries",
            a.nrows(),
            y.len()
        )));
    }
    let route = factorize(a, prior, sigma_sq)?;
    let quad = route.quad_form(y);
    if include_log_det {
        Ok(0.5 * route.log_det(a.nrows(), a.ncols()) + 0.5 * quad)
    } else {
        Ok(quad)
    }
}
