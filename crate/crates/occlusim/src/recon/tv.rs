//! Total-variation regularized least squares via accelerated proximal
//! gradient, with the TV proximal step solved by an inner dual projection
//! loop.
//!
//! Minimizes `|y - A f|^2 / 2 + lambda * TV(f)` where `TV` is the
//! anisotropic total variation: the sum of absolute differences between
//! neighboring patches, along the chain for 2-D worlds and along both
//! grid axes for 3-D hidden walls.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::largest_sq_singular_value;
use crate::stats::ReflectivityField;

/// Neighbor topology of the reflectivity vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridShape {
    /// 1-D chain of `n` patches.
    Line(usize),
    /// Row-major grid, matching the lexicographic patch order of a wall
    /// with `rows * cols` cells.
    Grid { rows: usize, cols: usize },
}

impl GridShape {
    pub fn len(&self) -> usize {
        match *self {
            GridShape::Line(n) => n,
            GridShape::Grid { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn num_edges(&self) -> usize {
        match *self {
            GridShape::Line(n) => n.saturating_sub(1),
            GridShape::Grid { rows, cols } => {
                rows * cols.saturating_sub(1) + rows.saturating_sub(1) * cols
            }
        }
    }

    /// Upper bound on the spectral norm of `D Dᵀ` for the difference
    /// operator of this topology.
    fn diff_gram_bound(&self) -> f64 {
        match *self {
            GridShape::Line(_) => 4.0,
            GridShape::Grid { .. } => 8.0,
        }
    }

    /// Forward differences into `out` (length `num_edges`).
    fn diff(&self, x: &DVector<f64>, out: &mut [f64]) {
        match *self {
            GridShape::Line(n) => {
                for i in 0..n - 1 {
                    out[i] = x[i + 1] - x[i];
                }
            }
            GridShape::Grid { rows, cols } => {
                let mut e = 0;
                for r in 0..rows {
                    for c in 0..cols - 1 {
                        out[e] = x[r * cols + c + 1] - x[r * cols + c];
                        e += 1;
                    }
                }
                for r in 0..rows - 1 {
                    for c in 0..cols {
                        out[e] = x[(r + 1) * cols + c] - x[r * cols + c];
                        e += 1;
                    }
                }
            }
        }
    }

    /// Adjoint of [`Self::diff`]: accumulates `Dᵀ p` into `out`.
    fn diff_adjoint(&self, p: &[f64], out: &mut DVector<f64>) {
        out.fill(0.0);
        match *self {
            GridShape::Line(n) => {
                for i in 0..n - 1 {
                    out[i + 1] += p[i];
                    out[i] -= p[i];
                }
            }
            GridShape::Grid { rows, cols } => {
                let mut e = 0;
                for r in 0..rows {
                    for c in 0..cols - 1 {
                        out[r * cols + c + 1] += p[e];
                        out[r * cols + c] -= p[e];
                        e += 1;
                    }
                }
                for r in 0..rows - 1 {
                    for c in 0..cols {
                        out[(r + 1) * cols + c] += p[e];
                        out[r * cols + c] -= p[e];
                        e += 1;
                    }
                }
            }
        }
    }
}

/// Anisotropic total variation of `x` under the given topology.
pub fn tv_norm(x: &DVector<f64>, shape: GridShape) -> f64 {
    let mut d = vec![0.0; shape.num_edges()];
    shape.diff(x, &mut d);
    d.iter().map(|v| v.abs()).sum()
}

/// Solver options. `lambda` is the TV weight, `tol` the relative-objective
/// stopping tolerance of the outer loop.
#[derive(Debug, Clone, Copy)]
pub struct TvOptions {
    pub lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub shape: GridShape,
}

/// Outcome of a TV solve. `converged` is false when the iteration cap was
/// hit before the objective settled; the estimate is still the best
/// iterate found.
#[derive(Debug, Clone)]
pub struct TvResult {
    pub estimate: ReflectivityField,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
}

const PROX_MAX_ITERS: usize = 100;
const PROX_TOL: f64 = 1e-8;
const POWER_ITERS: usize = 50;
const POWER_TOL: f64 = 1e-6;

/// Proximal map of `mu * TV` at `v`: solves
/// `min_x |x - v|^2 / 2 + mu TV(x)` by accelerated projected gradient on
/// the box-constrained dual.
fn tv_prox(v: &DVector<f64>, mu: f64, shape: GridShape) -> DVector<f64> {
    let edges = shape.num_edges();
    if mu == 0.0 || edges == 0 {
        return v.clone();
    }
    let n = v.len();
    let step = 1.0 / (mu * shape.diff_gram_bound());
    let mut p = vec![0.0; edges];
    let mut p_prev = vec![0.0; edges];
    let mut q = vec![0.0; edges];
    let mut x = v.clone();
    let mut x_prev = v.clone();
    let mut dtq = DVector::<f64>::zeros(n);
    let mut grad = vec![0.0; edges];
    let mut t: f64 = 1.0;
    for _ in 0..PROX_MAX_ITERS {
        // x(q) = v - mu Dᵀ q ; ascend the dual and clip to [-1, 1].
        shape.diff_adjoint(&q, &mut dtq);
        for i in 0..n {
            x[i] = v[i] - mu * dtq[i];
        }
        shape.diff(&x, &mut grad);
        for e in 0..edges {
            let cand = q[e] + step * grad[e];
            p[e] = cand.clamp(-1.0, 1.0);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for e in 0..edges {
            q[e] = p[e] + beta * (p[e] - p_prev[e]);
        }
        std::mem::swap(&mut p, &mut p_prev);
        t = t_next;

        // Primal iterate for the stopping test.
        shape.diff_adjoint(&p_prev, &mut dtq);
        let mut delta = 0.0;
        let mut scale = 0.0;
        for i in 0..n {
            let xi = v[i] - mu * dtq[i];
            delta += (xi - x_prev[i]) * (xi - x_prev[i]);
            scale += xi * xi;
            x_prev[i] = xi;
        }
        if delta.sqrt() <= PROX_TOL * scale.sqrt().max(1.0) {
            break;
        }
    }
    x_prev
}

/// TV-regularized reconstruction (accelerated proximal gradient with a
/// monotone restart: a momentum step that would raise the objective is
/// replaced by a plain descent step from the previous iterate).
pub fn tv_reconstruct(a: &DMatrix<f64>, y: &DVector<f64>, opts: &TvOptions) -> Result<TvResult> {
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "operator has {m} rows but y has {} entries",
            y.len()
        )));
    }
    if opts.shape.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator has {n} columns but the grid shape covers {}",
            opts.shape.len()
        )));
    }
    if opts.lambda.is_nan() || opts.lambda < 0.0 {
        return Err(Error::Config("lambda must be >= 0".into()));
    }
    let lipschitz = largest_sq_singular_value(a, POWER_ITERS, POWER_TOL);
    if lipschitz <= 0.0 {
        // A zero operator: every constant fit is equivalent; return zero.
        return Ok(TvResult {
            estimate: DVector::zeros(n),
            converged: true,
            iterations: 0,
            objective: 0.5 * y.norm_squared(),
        });
    }
    let step = 1.0 / lipschitz;
    let objective = |x: &DVector<f64>| -> f64 {
        0.5 * (a * x - y).norm_squared() + opts.lambda * tv_norm(x, opts.shape)
    };

    let mut x = DVector::<f64>::zeros(n);
    let mut z = x.clone();
    let mut t: f64 = 1.0;
    let mut f_curr = objective(&x);
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=opts.max_iters {
        iterations = it;
        let grad = a.tr_mul(&(a * &z - y));
        let mut x_next = tv_prox(&(&z - &grad * step), step * opts.lambda, opts.shape);
        let mut f_next = objective(&x_next);
        if f_next > f_curr {
            // Restart: plain proximal step from x descends for step <= 1/L.
            let grad_x = a.tr_mul(&(a * &x - y));
            x_next = tv_prox(&(&x - &grad_x * step), step * opts.lambda, opts.shape);
            f_next = objective(&x_next);
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);
        x = x_next;
        t = t_next;
        let rel = (f_curr - f_next).abs() / f_next.abs().max(1e-300);
        f_curr = f_next;
        if rel <= opts.tol {
            converged = true;
            break;
        }
    }
    Ok(TvResult { estimate: x, converged, iterations, objective: f_curr })
}
