//! Information-driven selection of `(laser, camera)` measurement pairs.
//!
//! With a Gaussian prior and i.i.d. Gaussian noise, the information a
//! measurement set `P` carries about the reflectivity has the closed form
//!
//! ```text
//! Phi(P) = log det(I + A_P S A_Pᵀ / sigma^2) / 2     (natural log)
//! ```
//!
//! `Phi` is monotone and submodular, so the greedy sweep that adds the
//! largest marginal gain per iteration is within a `(1 - 1/e)` factor of
//! the optimal budgeted subset. Marginal gains are evaluated through an
//! incrementally grown Cholesky factor of the inner matrix: scoring one
//! candidate costs a single triangular solve.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::forward::nontr_row;
use crate::geometry::{Point, Scene};
use crate::stats::GaussianPrior;

/// Candidate measurement pairs with their cached operator rows.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pairs: Vec<(Point, Point)>,
    rows: DMatrix<f64>,
}

impl CandidateSet {
    /// All `(l, c)` products of a uniform illumination-wall grid with
    /// `grid` points per axis; `coincident_only` restricts to `l = c`.
    /// Rows are time-integrated transport rows for the scene.
    pub fn from_grid(scene: &Scene, grid: usize, coincident_only: bool) -> Result<CandidateSet> {
        if grid == 0 {
            return Err(Error::Empty("candidate grid needs at least one point".into()));
        }
        let probe = scene.illumination_wall().with_counts(grid)?;
        let points: Vec<Point> = probe.patches().iter().map(|p| p.center).collect();
        let mut pairs = Vec::new();
        for (i, l) in points.iter().enumerate() {
            for (j, c) in points.iter().enumerate() {
                if coincident_only && i != j {
                    continue;
                }
                pairs.push((*l, *c));
            }
        }
        CandidateSet::from_scene_pairs(scene, pairs)
    }

    /// Cache rows for explicit pairs.
    pub fn from_scene_pairs(scene: &Scene, pairs: Vec<(Point, Point)>) -> Result<CandidateSet> {
        if pairs.is_empty() {
            return Err(Error::Empty("candidate set needs at least one pair".into()));
        }
        let patches = scene.hidden_patches();
        let mut rows = DMatrix::zeros(pairs.len(), patches.len());
        for (k, (l, c)) in pairs.iter().enumerate() {
            rows.row_mut(k)
                .copy_from(&nontr_row(l, c, &patches, scene.occluders()).transpose());
        }
        Ok(CandidateSet { pairs, rows })
    }

    /// Wrap precomputed rows (used by the small randomized test instances).
    pub fn from_rows(pairs: Vec<(Point, Point)>, rows: DMatrix<f64>) -> Result<CandidateSet> {
        if pairs.len() != rows.nrows() || pairs.is_empty() {
            return Err(Error::Empty("pairs and rows must align and be nonempty".into()));
        }
        Ok(CandidateSet { pairs, rows })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// The operator formed by the rows of `subset`, in subset order.
    pub fn operator(&self, subset: &[usize]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(subset.len(), self.rows.ncols());
        for (i, &k) in subset.iter().enumerate() {
            a.row_mut(i).copy_from(&self.rows.row(k));
        }
        a
    }
}

/// Ordered greedy (or exhaustive) output: chosen candidate indices and the
/// objective value after each addition.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Candidate indices in selection order.
    pub selected: Vec<usize>,
    /// `Phi` after each addition; nondecreasing.
    pub objective: Vec<f64>,
}

impl SelectionResult {
    /// Final objective value.
    pub fn final_objective(&self) -> f64 {
        *self.objective.last().unwrap_or(&0.0)
    }
}

/// Gram matrix `rows S rowsᵀ` scaled by `1/sigma^2`.
fn scaled_gram(cands: &CandidateSet, prior: &GaussianPrior, sigma_sq: f64) -> Result<DMatrix<f64>> {
    if cands.rows.ncols() != prior.len() {
        return Err(Error::DimensionMismatch(format!(
            "candidate rows have {} columns but the prior has {} entries",
            cands.rows.ncols(),
            prior.len()
        )));
    }
    if sigma_sq.is_nan() || sigma_sq <= 0.0 {
        return Err(Error::Config("selection needs sigma^2 > 0".into()));
    }
    Ok(&cands.rows * prior.covariance() * cands.rows.transpose() / sigma_sq)
}

/// Mutual information `Phi(subset)` in nats; 0 for the empty set.
pub fn mi_objective(
    cands: &CandidateSet,
    subset: &[usize],
    prior: &GaussianPrior,
    sigma_sq: f64,
) -> Result<f64> {
    if subset.is_empty() {
        return Ok(0.0);
    }
    let gram = scaled_gram(cands, prior, sigma_sq)?;
    let k = subset.len();
    let mut inner = DMatrix::from_fn(k, k, |i, j| gram[(subset[i], subset[j])]);
    for i in 0..k {
        inner[(i, i)] += 1.0;
    }
    let solver = crate::linalg::SpdSolver::new(inner)?;
    Ok(0.5 * solver.log_det())
}

/// Incrementally grown Cholesky factor of `I + Gram[C, C]`.
struct GrowingChol {
    l: Vec<Vec<f64>>, // row-compressed lower triangle
    chosen: Vec<usize>,
}

impl GrowingChol {
    fn new() -> Self {
        GrowingChol { l: Vec::new(), chosen: Vec::new() }
    }

    /// `log(Schur complement)` of candidate `p`, i.e. twice its marginal
    /// information gain; also returns the solve vector for a later accept.
    fn gain(&self, gram: &DMatrix<f64>, p: usize) -> (f64, Vec<f64>) {
        let k = self.chosen.len();
        let mut z = Vec::with_capacity(k);
        for i in 0..k {
            let mut acc = gram[(self.chosen[i], p)];
            for (j, zj) in z.iter().enumerate().take(i) {
                acc -= self.l[i][j] * zj;
            }
            z.push(acc / self.l[i][i]);
        }
        let schur = 1.0 + gram[(p, p)] - z.iter().map(|v| v * v).sum::<f64>();
        (0.5 * schur.max(f64::MIN_POSITIVE).ln(), z)
    }

    fn accept(&mut self, gram: &DMatrix<f64>, p: usize, mut z: Vec<f64>) {
        let schur = 1.0 + gram[(p, p)] - z.iter().map(|v| v * v).sum::<f64>();
        z.push(schur.max(f64::MIN_POSITIVE).sqrt());
        self.l.push(z);
        self.chosen.push(p);
    }
}

/// Greedy maximization of `Phi` under a budget of `k` picks. Ties break
/// to the lowest candidate index. `lazy` switches to the priority-queue
/// variant with identical output.
pub fn greedy_select(
    cands: &CandidateSet,
    k: usize,
    prior: &GaussianPrior,
    sigma_sq: f64,
    lazy: bool,
) -> Result<SelectionResult> {
    if k == 0 || k > cands.len() {
        return Err(Error::Config(format!(
            "budget {k} must lie in 1..={}",
            cands.len()
        )));
    }
    let gram = scaled_gram(cands, prior, sigma_sq)?;
    if lazy {
        greedy_lazy(&gram, cands.len(), k)
    } else {
        greedy_eager(&gram, cands.len(), k)
    }
}

fn greedy_eager(gram: &DMatrix<f64>, n: usize, k: usize) -> Result<SelectionResult> {
    let mut chol = GrowingChol::new();
    let mut selected = Vec::with_capacity(k);
    let mut objective = Vec::with_capacity(k);
    let mut phi = 0.0;
    let mut taken = vec![false; n];
    for _ in 0..k {
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for (p, taken_p) in taken.iter().enumerate() {
            if *taken_p {
                continue;
            }
            let (gain, z) = chol.gain(gram, p);
            // Strict comparison keeps the lowest index on ties.
            if best.as_ref().is_none_or(|(g, _, _)| gain > *g) {
                best = Some((gain, p, z));
            }
        }
        let (gain, p, z) = best.expect("budget is checked against candidate count");
        chol.accept(gram, p, z);
        taken[p] = true;
        phi += gain;
        selected.push(p);
        objective.push(phi);
    }
    Ok(SelectionResult { selected, objective })
}

fn greedy_lazy(gram: &DMatrix<f64>, n: usize, k: usize) -> Result<SelectionResult> {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Entry {
        bound: f64,
        idx: usize,
        round: usize,
    }
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> Ordering {
            // Max-heap on bound, then lowest index first.
            self.bound
                .total_cmp(&other.bound)
                .then_with(|| other.idx.cmp(&self.idx))
        }
    }

    let mut chol = GrowingChol::new();
    let mut heap = BinaryHeap::with_capacity(n);
    for p in 0..n {
        heap.push(Entry { bound: f64::INFINITY, idx: p, round: usize::MAX });
    }
    let mut selected = Vec::with_capacity(k);
    let mut objective = Vec::with_capacity(k);
    let mut phi = 0.0;
    let mut cached_z: Vec<Option<Vec<f64>>> = vec![None; n];
    for round in 0..k {
        loop {
            let top = heap.pop().expect("heap cannot drain before the budget");
            if top.round == round {
                // Fresh bound: by submodularity no stale bound below it can
                // beat it, and the heap order already broke ties by index.
                let z = cached_z[top.idx].take().expect("fresh entries carry their solve");
                chol.accept(gram, top.idx, z);
                phi += top.bound;
                selected.push(top.idx);
                objective.push(phi);
                break;
            }
            let (gain, z) = chol.gain(gram, top.idx);
            cached_z[top.idx] = Some(z);
            heap.push(Entry { bound: gain, idx: top.idx, round });
        }
    }
    Ok(SelectionResult { selected, objective })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

const EXHAUSTIVE_GUARD: u128 = 1_000_000;

/// Global maximizer of `Phi` over all size-`k` subsets, for small
/// instances. Guards against more than 10^6 subsets.
pub fn exhaustive_select(
    cands: &CandidateSet,
    k: usize,
    prior: &GaussianPrior,
    sigma_sq: f64,
) -> Result<SelectionResult> {
    let n = cands.len();
    if k == 0 || k > n {
        return Err(Error::Config(format!("budget {k} must lie in 1..={n}")));
    }
    let subsets = binomial(n, k);
    if subsets > EXHAUSTIVE_GUARD {
        return Err(Error::CombinatorialGuard { subsets, guard: EXHAUSTIVE_GUARD });
    }
    let gram = scaled_gram(cands, prior, sigma_sq)?;
    let phi_of = |subset: &[usize]| -> f64 {
        let m = subset.len();
        let mut inner = DMatrix::from_fn(m, m, |i, j| gram[(subset[i], subset[j])]);
        for i in 0..m {
            inner[(i, i)] += 1.0;
        }
        0.5 * crate::linalg::SpdSolver::new(inner)
            .expect("I + PSD is positive definite")
            .log_det()
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let phi = phi_of(&subset);
        // Strict comparison keeps the lexicographically first maximizer.
        if best.as_ref().is_none_or(|(b, _)| phi > *b) {
            best = Some((phi, subset.clone()));
        }
        if !next_combination(&mut subset, n) {
            let (_, sel) = best.expect("at least one subset was scored");
            let objective: Result<Vec<f64>> = (1..=k)
                .map(|m| mi_objective(cands, &sel[..m], prior, sigma_sq))
                .collect();
            return Ok(SelectionResult { selected: sel, objective: objective? });
        }
    }
}

/// Advance `subset` to the next size-k combination of `0..n` in
/// lexicographic order; false once the last combination has been seen.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in (0..k).rev() {
        if subset[i] != i + n - k {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Information-optimal estimate of a row vector set for quick checks:
/// `Phi` of a single candidate.
pub fn singleton_information(
    cands: &CandidateSet,
    idx: usize,
    prior: &GaussianPrior,
    sigma_sq: f64,
) -> Result<f64> {
    mi_objective(cands, &[idx], prior, sigma_sq)
}
