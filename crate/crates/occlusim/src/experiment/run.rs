//! The experiment engine: expands sweep axes, runs replications in
//! parallel with deterministic seeding, and assembles the report.
//!
//! Seeding contract: replication `r` of every sweep point uses the seed
//! `master_seed ^ r` and draws, in order, the measurement pairs, the
//! ground truth, and the noise. Sweep points therefore share their random
//! draws (common random numbers), which sharpens trend comparisons across
//! a sweep.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::config::{
    point_from_components, ExperimentConfig, NoiseConfig, PlanConfig, SolverConfig, TruthConfig,
};
use crate::experiment::report::{
    Artifact, ExperimentReport, Provenance, ReportRow,
};
use crate::forward::{
    assemble_matrix, focused_specs, tr_specs, MeasurementSpec, PulseShape, TimeGrid,
};
use crate::geometry::{Occluder, Point, Scene, SurfacePatch};
use crate::linalg::singular_values_desc;
use crate::plot;
use crate::recon::{
    depth_search, mmse, tv_reconstruct, GridShape, NllMode, TvOptions,
};
use crate::rng::{rng_from_seed, sample_distinct};
use crate::stats::{noise_for_target_snr, simulate_measurements_with, snr_db, GaussianPrior};

/// Report plus wall-clock per record (timings are not part of the
/// deterministic report bytes).
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub cell_millis: Vec<f64>,
}

impl RunOutcome {
    /// Non-deterministic companion file with per-record wall-clock times.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("record,wall_ms\n");
        for (i, ms) in self.cell_millis.iter().enumerate() {
            out.push_str(&format!("{i},{ms:.3}\n"));
        }
        out
    }

    /// Write the report, artifacts, config echo, and timings.
    pub fn write_to_dir(&self, config: &ExperimentConfig, dir: &std::path::Path) -> Result<()> {
        self.report.write_to_dir(dir)?;
        std::fs::write(dir.join("config.json"), config.to_json())?;
        std::fs::write(dir.join("timing.csv"), self.timing_csv())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SweepPoint {
    bin_width_s: Option<f64>,
    separation_m: Option<f64>,
    snr_db: Option<f64>,
    budget: Option<usize>,
    mismatch: Option<(f64, f64)>,
    sigma_f_sq: Option<f64>,
}

fn sweep_points(config: &ExperimentConfig) -> (Vec<String>, Vec<SweepPoint>) {
    let sw = &config.sweep;
    let mut columns = Vec::new();
    if !sw.bin_width_s.is_empty() {
        columns.push("bin_width_s".to_string());
    }
    if !sw.separation_m.is_empty() {
        columns.push("separation_m".to_string());
    }
    if !sw.snr_db.is_empty() {
        columns.push("snr_db_target".to_string());
    }
    if !sw.budget.is_empty() {
        columns.push("budget".to_string());
    }
    if !sw.mismatch.is_empty() {
        columns.push("mismatch_dx_m".to_string());
        columns.push("mismatch_dh_m".to_string());
    }
    if !sw.sigma_f_sq.is_empty() {
        columns.push("sigma_f_sq".to_string());
    }

    let opt = |v: &Vec<f64>| -> Vec<Option<f64>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().map(|x| Some(*x)).collect()
        }
    };
    let budgets: Vec<Option<usize>> = if sw.budget.is_empty() {
        vec![None]
    } else {
        sw.budget.iter().map(|k| Some(*k)).collect()
    };
    let mismatches: Vec<Option<(f64, f64)>> = if sw.mismatch.is_empty() {
        vec![None]
    } else {
        sw.mismatch.iter().map(|m| Some(*m)).collect()
    };

    let mut points = Vec::new();
    for &dt in &opt(&sw.bin_width_s) {
        for &d in &opt(&sw.separation_m) {
            for &snr in &opt(&sw.snr_db) {
                for &k in &budgets {
                    for &mm in &mismatches {
                        for &sf in &opt(&sw.sigma_f_sq) {
                            points.push(SweepPoint {
                                bin_width_s: dt,
                                separation_m: d,
                                snr_db: snr,
                                budget: k,
                                mismatch: mm,
                                sigma_f_sq: sf,
                            });
                        }
                    }
                }
            }
        }
    }
    (columns, points)
}

impl SweepPoint {
    fn values(&self) -> Vec<f64> {
        let mut v = Vec::new();
        if let Some(dt) = self.bin_width_s {
            v.push(dt);
        }
        if let Some(d) = self.separation_m {
            v.push(d);
        }
        if let Some(s) = self.snr_db {
            v.push(s);
        }
        if let Some(k) = self.budget {
            v.push(k as f64);
        }
        if let Some((dx, dh)) = self.mismatch {
            v.push(dx);
            v.push(dh);
        }
        if let Some(sf) = self.sigma_f_sq {
            v.push(sf);
        }
        v
    }
}

/// `count` distinct point-index pairs from a grid of `n_points`, in draw
/// order (rejection sampling keeps memory independent of `n_points^2`).
fn draw_distinct_pairs<R: rand::Rng + ?Sized>(
    rng: &mut R,
    n_points: usize,
    count: usize,
) -> Vec<(usize, usize)> {
    let mut seen = std::collections::HashSet::with_capacity(count * 2);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let i = rng.random_range(0..n_points);
        let j = rng.random_range(0..n_points);
        if seen.insert((i, j)) {
            out.push((i, j));
        }
    }
    out
}

/// Blocky letter glyph (an "E") in the upper-left region of a
/// `rows x cols` grid, returned in lexicographic (row-major) patch order.
/// Strokes are at least two cells wide so the glyph stays resolvable on
/// coarse grids.
pub fn letter_pattern(rows: usize, cols: usize) -> DVector<f64> {
    let mut f = DVector::zeros(rows * cols);
    let r0 = rows / 8;
    let r1 = (rows * 9) / 16;
    let c0 = cols / 8;
    let c1 = cols / 2;
    let stroke = ((r1 - r0) / 4).max(2);
    for r in r0..r1 {
        for c in c0..c1 {
            let vertical = c < c0 + stroke;
            let bar_top = r < r0 + stroke;
            let mid = (r0 + r1) / 2;
            let bar_mid = r >= mid - stroke / 2 && r < mid + stroke.div_ceil(2);
            let bar_bot = r >= r1 - stroke;
            if vertical || bar_top || bar_mid || bar_bot {
                f[r * cols + c] = 1.0;
            }
        }
    }
    f
}

/// Deterministic piecewise-constant profile with a few plateaus.
pub fn piecewise_profile(n: usize) -> DVector<f64> {
    let levels = [0.2, 1.0, 0.4, 0.8];
    DVector::from_fn(n, |i, _| levels[(i * levels.len()) / n.max(1)])
}

/// Pearson correlation between two equal-length vectors.
pub fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let n = a.len() as f64;
    let ma = a.mean();
    let mb = b.mean();
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..a.len() {
        let xa = a[i] - ma;
        let xb = b[i] - mb;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    let _ = n;
    if da == 0.0 || db == 0.0 {
        0.0
    } else {
        num / (da * db).sqrt()
    }
}

/// Lag of the cross-correlation peak between `a` and `b`, scanning
/// `score(L) = mean_i a[i] b[i+L]` with `i` restricted to the middle
/// `middle_frac` of the support. Positive lag means `a` matches `b`
/// shifted to higher indices.
pub fn xcorr_peak_lag(
    a: &DVector<f64>,
    b: &DVector<f64>,
    middle_frac: f64,
    max_lag: usize,
) -> isize {
    let n = a.len();
    let skip = ((1.0 - middle_frac) / 2.0 * n as f64).round() as usize;
    let window = skip..n - skip;
    let mut best = (f64::NEG_INFINITY, 0isize);
    for lag in -(max_lag as isize)..=(max_lag as isize) {
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in window.clone() {
            let j = i as isize + lag;
            if j >= 0 && (j as usize) < n {
                acc += a[i] * b[j as usize];
                count += 1;
            }
        }
        if count > 0 {
            let score = acc / count as f64;
            if score > best.0 {
                best = (score, lag);
            }
        }
    }
    best.1
}

/// Displace every flat occluder of the scene by `(dx, dh)`; general
/// occluders cannot be displaced analytically and are rejected.
pub fn displaced_scene(scene: &Scene, dx: f64, dh: f64) -> Result<Scene> {
    let occluders: Result<Vec<Occluder>> = scene
        .occluders()
        .iter()
        .map(|o| match o {
            Occluder::Flat(f) => Ok(Occluder::Flat(f.displaced(dx, dh)?)),
            Occluder::General(_) => Err(Error::Config(
                "mismatch sweeps need flat occluders".into(),
            )),
        })
        .collect();
    scene.with_occluders(occluders?)
}

struct CellContext<'a> {
    config: &'a ExperimentConfig,
    base_scene: &'a Scene,
    priors: &'a BTreeMap<u64, GaussianPrior>,
    sweep: SweepPoint,
    replication: usize,
}

struct CellOutput {
    values: Vec<f64>,
    millis: f64,
}

fn prior_key(sigma_f_sq: f64) -> u64 {
    sigma_f_sq.to_bits()
}

/// Measurement rows plus the focused pairs they came from (empty for
/// raster plans).
type ResolvedPlan = (Vec<MeasurementSpec>, Vec<(Point, Point)>);

/// Resolve the measurement specs for one cell, consuming pair draws from
/// `rng` in a plan-defined order.
fn resolve_specs<R: rand::Rng + ?Sized>(
    config: &ExperimentConfig,
    scene: &Scene,
    patches: &[SurfacePatch],
    sweep: &SweepPoint,
    prior: &GaussianPrior,
    rng: &mut R,
) -> Result<ResolvedPlan> {
    let dim = scene.dim();
    match &config.plan {
        PlanConfig::ExplicitPairs { pairs } => {
            let comp = dim.transverse_axes() + 1;
            let mut out = Vec::with_capacity(pairs.len());
            for p in pairs {
                if p.len() != 2 * comp {
                    return Err(Error::Config(format!(
                        "explicit pair needs {} components, got {}",
                        2 * comp,
                        p.len()
                    )));
                }
                out.push((
                    point_from_components(dim, &p[..comp])?,
                    point_from_components(dim, &p[comp..])?,
                ));
            }
            Ok((focused_specs(&out), out))
        }
        PlanConfig::RandomPairs { count, grid, coincident_only } => {
            let k = sweep.budget.unwrap_or(*count);
            let points = grid_points(scene, *grid)?;
            let pairs = if *coincident_only {
                sample_distinct(rng, points.len(), k)
                    .into_iter()
                    .map(|i| (points[i], points[i]))
                    .collect::<Vec<_>>()
            } else {
                draw_distinct_pairs(rng, points.len(), k)
                    .into_iter()
                    .map(|(i, j)| (points[i], points[j]))
                    .collect::<Vec<_>>()
            };
            Ok((focused_specs(&pairs), pairs))
        }
        PlanConfig::GreedyPairs { count, grid, coincident_only, lazy } => {
            let k = sweep.budget.unwrap_or(*count);
            let cands = crate::select::CandidateSet::from_grid(scene, *grid, *coincident_only)?;
            let sigma_sq = match config.noise {
                NoiseConfig::SigmaSq(v) => v,
                NoiseConfig::TargetSnrDb(_) => {
                    return Err(Error::Config(
                        "greedy plans need a fixed noise variance".into(),
                    ))
                }
            };
            let sel = crate::select::greedy_select(&cands, k, prior, sigma_sq, *lazy)?;
            let pairs: Vec<(Point, Point)> =
                sel.selected.iter().map(|&i| cands.pairs()[i]).collect();
            Ok((focused_specs(&pairs), pairs))
        }
        PlanConfig::TimeResolved { count, grid, bin_width_s, bins } => {
            let k = sweep.budget.unwrap_or(*count);
            let dt = sweep.bin_width_s.unwrap_or(*bin_width_s);
            let points = grid_points(scene, *grid)?;
            let pairs: Vec<(Point, Point)> = draw_distinct_pairs(rng, points.len(), k)
                .into_iter()
                .map(|(i, j)| (points[i], points[j]))
                .collect();
            let mut time_grid = TimeGrid::span(&pairs, patches, dt, PulseShape::Delta)?;
            if let Some(b) = bins {
                time_grid = time_grid.extended(*b);
            }
            Ok((tr_specs(&pairs, time_grid.bins, dt), pairs))
        }
        PlanConfig::WideFovRaster { raster, detector, fov } => {
            if raster.len() != dim.transverse_axes() {
                return Err(Error::Config(format!(
                    "raster needs {} axis counts",
                    dim.transverse_axes()
                )));
            }
            let wall = scene.illumination_wall();
            let probe = crate::geometry::Wall::new(
                wall.origin(),
                wall.axes().to_vec(),
                wall.extents().to_vec(),
                raster.clone(),
                wall.normal(),
            )?;
            let det = point_from_components(dim, detector)?;
            let fov_wall = match dim {
                crate::geometry::Dim::Two => crate::geometry::Wall::span_2d(
                    fov.origin[0],
                    fov.extents[0],
                    fov.depth,
                    fov.counts[0],
                    if fov.normal == 0.0 { 1.0 } else { fov.normal },
                )?,
                crate::geometry::Dim::Three => crate::geometry::Wall::span_3d(
                    (fov.origin[0], fov.origin[1]),
                    (fov.extents[0], fov.extents[1]),
                    fov.depth,
                    (fov.counts[0], fov.counts[1]),
                    if fov.normal == 0.0 { 1.0 } else { fov.normal },
                )?,
            };
            let specs: Vec<MeasurementSpec> = probe
                .patches()
                .iter()
                .map(|p| MeasurementSpec::WideFov {
                    laser: p.center,
                    detector: det,
                    fov: fov_wall.clone(),
                })
                .collect();
            Ok((specs, Vec::new()))
        }
    }
}

fn grid_points(scene: &Scene, grid: usize) -> Result<Vec<Point>> {
    Ok(scene
        .illumination_wall()
        .with_counts(grid)?
        .patches()
        .iter()
        .map(|p| p.center)
        .collect())
}

fn truth_vector(
    config: &ExperimentConfig,
    scene: &Scene,
    prior: &GaussianPrior,
    rng: &mut impl rand::Rng,
) -> (DVector<f64>, f64) {
    match config.truth {
        TruthConfig::PriorDraw => (prior.sample_with(rng), prior.trace()),
        TruthConfig::LetterPattern => {
            let counts = scene.hidden_wall().counts();
            let f = match counts.len() {
                2 => letter_pattern(counts[0], counts[1]),
                _ => piecewise_profile(counts[0]),
            };
            let norm = f.norm_squared();
            (f, norm)
        }
        TruthConfig::PiecewiseConstant => {
            let f = piecewise_profile(scene.hidden_wall().patch_count());
            let norm = f.norm_squared();
            (f, norm)
        }
    }
}

fn value_columns(config: &ExperimentConfig) -> Vec<String> {
    let mut cols = vec!["sigma_sq".to_string(), "snr_db".to_string()];
    match &config.solver {
        SolverConfig::Mmse => {
            cols.push("nmse".into());
            cols.push("nmse_pred".into());
            if !config.sweep.mismatch.is_empty() {
                cols.push("xcorr_lag_cells".into());
            }
        }
        SolverConfig::Tv { compare_mmse, .. } => {
            cols.push("corr_tv".into());
            cols.push("nmse_tv".into());
            cols.push("tv_objective".into());
            cols.push("tv_iterations".into());
            cols.push("tv_converged".into());
            if *compare_mmse {
                cols.push("corr_mmse".into());
                cols.push("nmse_mmse".into());
            }
        }
        SolverConfig::DepthSearch { candidates, .. } => {
            cols.push("d_hat_m".into());
            cols.push("d_abs_err_m".into());
            cols.push("nmse".into());
            for c in candidates {
                cols.push(format!("nll_at_{c:.2}"));
            }
        }
    }
    if config.baseline_unoccluded {
        cols.push("sigma_sq_unocc".into());
        cols.push("nmse_unocc".into());
        cols.push("nmse_pred_unocc".into());
    }
    cols
}

fn run_cell(ctx: &CellContext) -> Result<CellOutput> {
    let start = Instant::now();
    let config = ctx.config;
    let seed = config.master_seed ^ ctx.replication as u64;
    let mut rng = rng_from_seed(seed);

    let scene = match ctx.sweep.separation_m {
        Some(d) => ctx.base_scene.with_separation(d)?,
        None => ctx.base_scene.clone(),
    };
    let patches = scene.hidden_patches();
    let sigma_f = ctx.sweep.sigma_f_sq.unwrap_or(config.prior.sigma_f_sq);
    let prior = &ctx.priors[&prior_key(sigma_f)];

    let (specs, pairs) = resolve_specs(config, &scene, &patches, &ctx.sweep, prior, &mut rng)?;
    let a_true = assemble_matrix(&specs, &patches, scene.occluders())?.entries;

    let (f, denom) = truth_vector(config, &scene, prior, &mut rng);
    let sigma_sq = match (ctx.sweep.snr_db, &config.noise) {
        (Some(target), _) => noise_for_target_snr(&a_true, prior, target)?,
        (None, NoiseConfig::SigmaSq(v)) => *v,
        (None, NoiseConfig::TargetSnrDb(target)) => {
            noise_for_target_snr(&a_true, prior, *target)?
        }
    };
    let y = simulate_measurements_with(&a_true, &f, sigma_sq, &mut rng)?;

    let mut values = vec![sigma_sq, snr_db(&a_true, prior, sigma_sq)?];
    match &config.solver {
        SolverConfig::Mmse => {
            // The solver may assume displaced occluders while the data
            // keep coming from the true scene.
            let a_model = match ctx.sweep.mismatch {
                Some((dx, dh)) if dx != 0.0 || dh != 0.0 => {
                    let mis = displaced_scene(&scene, dx, dh)?;
                    assemble_matrix(&specs, &patches, mis.occluders())?.entries
                }
                _ => a_true.clone(),
            };
            let rec = mmse(&a_model, &y, prior, sigma_sq)?;
            values.push((&rec.estimate - &f).norm_squared() / denom);
            values.push(rec.nmse);
            if !config.sweep.mismatch.is_empty() {
                let max_lag = patches.len() / 4;
                values.push(xcorr_peak_lag(&rec.estimate, &f, 0.6, max_lag) as f64);
            }
        }
        SolverConfig::Tv { lambda, max_iters, tol, compare_mmse } => {
            let counts = scene.hidden_wall().counts();
            let shape = match counts.len() {
                2 => GridShape::Grid { rows: counts[0], cols: counts[1] },
                _ => GridShape::Line(counts[0]),
            };
            let tv = tv_reconstruct(
                &a_true,
                &y,
                &TvOptions { lambda: *lambda, max_iters: *max_iters, tol: *tol, shape },
            )?;
            values.push(pearson(&tv.estimate, &f));
            values.push((&tv.estimate - &f).norm_squared() / denom);
            values.push(tv.objective);
            values.push(tv.iterations as f64);
            values.push(if tv.converged { 1.0 } else { 0.0 });
            if *compare_mmse {
                let rec = mmse(&a_true, &y, prior, sigma_sq)?;
                values.push(pearson(&rec.estimate, &f));
                values.push((&rec.estimate - &f).norm_squared() / denom);
            }
        }
        SolverConfig::DepthSearch { candidates, full_evidence } => {
            let mode = if *full_evidence { NllMode::FullEvidence } else { NllMode::QuadraticOnly };
            let spec_list = focused_specs(&pairs);
            let base = &scene;
            let res = depth_search(&y, candidates, prior, sigma_sq, mode, |d| {
                let moved = base.with_separation(d)?;
                Ok(assemble_matrix(&spec_list, &moved.hidden_patches(), moved.occluders())?
                    .entries)
            })?;
            values.push(res.best_distance);
            values.push((res.best_distance - scene.separation()).abs());
            values.push((&res.best_estimate - &f).norm_squared() / denom);
            values.extend(res.nll.iter());
        }
    }

    if config.baseline_unoccluded {
        let a0 = assemble_matrix(&specs, &patches, &[])?.entries;
        let sigma0 = match (ctx.sweep.snr_db, &config.noise) {
            (Some(target), _) => noise_for_target_snr(&a0, prior, target)?,
            (None, NoiseConfig::SigmaSq(v)) => *v,
            (None, NoiseConfig::TargetSnrDb(target)) => noise_for_target_snr(&a0, prior, *target)?,
        };
        let y0 = simulate_measurements_with(&a0, &f, sigma0, &mut rng)?;
        let rec0 = mmse(&a0, &y0, prior, sigma0)?;
        values.push(sigma0);
        values.push((&rec0.estimate - &f).norm_squared() / denom);
        values.push(rec0.nmse);
    }

    Ok(CellOutput { values, millis: start.elapsed().as_secs_f64() * 1e3 })
}

/// Deterministic artifacts for the first sweep point and replication.
fn build_artifacts(
    config: &ExperimentConfig,
    base_scene: &Scene,
    priors: &BTreeMap<u64, GaussianPrior>,
    first: &SweepPoint,
) -> Result<Vec<Artifact>> {
    let out_cfg = &config.outputs;
    if !(out_cfg.dump_matrices || out_cfg.dump_singular_values || out_cfg.dump_reconstruction) {
        return Ok(Vec::new());
    }
    let seed = config.master_seed;
    let mut rng = rng_from_seed(seed);
    let scene = match first.separation_m {
        Some(d) => base_scene.with_separation(d)?,
        None => base_scene.clone(),
    };
    let patches = scene.hidden_patches();
    let sigma_f = first.sigma_f_sq.unwrap_or(config.prior.sigma_f_sq);
    let prior = &priors[&prior_key(sigma_f)];
    let (specs, pairs) = resolve_specs(config, &scene, &patches, first, prior, &mut rng)?;
    let assembled = assemble_matrix(&specs, &patches, scene.occluders())?;
    let assembled0 = assemble_matrix(&specs, &patches, &[])?;
    let a = assembled.entries.clone();
    let a0 = assembled0.entries.clone();
    let sigma_sq = match (first.snr_db, &config.noise) {
        (Some(t), _) => noise_for_target_snr(&a, prior, t)?,
        (None, NoiseConfig::SigmaSq(v)) => *v,
        (None, NoiseConfig::TargetSnrDb(t)) => noise_for_target_snr(&a, prior, *t)?,
    };
    let (f, _) = truth_vector(config, &scene, prior, &mut rng);
    let y = simulate_measurements_with(&a, &f, sigma_sq, &mut rng)?;

    let to_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    };

    let mut artifacts = Vec::new();
    if out_cfg.dump_matrices {
        artifacts.push(Artifact {
            filename: "operator.csv".into(),
            content: assembled.to_csv(),
        });
        if !pairs.is_empty() && !scene.occluders().is_empty() {
            let mask =
                crate::geometry::visibility_matrix(&pairs, &patches, scene.occluders());
            let rows = to_rows(&mask);
            artifacts.push(Artifact {
                filename: "visibility.csv".into(),
                content: plot::matrix_csv(&rows),
            });
            artifacts.push(Artifact {
                filename: "visibility.svg".into(),
                content: plot::heatmap(&rows, "binary visibility mask"),
            });
        }
        artifacts.push(Artifact {
            filename: "operator.svg".into(),
            content: plot::heatmap(&to_rows(&a), "measurement operator"),
        });
        if config.baseline_unoccluded {
            artifacts.push(Artifact {
                filename: "operator_unoccluded.csv".into(),
                content: assembled0.to_csv(),
            });
            artifacts.push(Artifact {
                filename: "operator_unoccluded.svg".into(),
                content: plot::heatmap(&to_rows(&a0), "operator without occluders"),
            });
        }
    }
    if out_cfg.dump_singular_values {
        let sv = singular_values_desc(&a);
        let sv0 = singular_values_desc(&a0);
        let mut csv = String::from("index,sigma,sigma_unoccluded\n");
        for i in 0..sv.len().max(sv0.len()) {
            csv.push_str(&format!(
                "{},{},{}\n",
                i,
                sv.get(i).copied().unwrap_or(0.0),
                sv0.get(i).copied().unwrap_or(0.0)
            ));
        }
        artifacts.push(Artifact { filename: "singular_values.csv".into(), content: csv });
    }
    if out_cfg.dump_reconstruction {
        let rec = mmse(&a, &y, prior, sigma_sq)?;
        let counts = scene.hidden_wall().counts();
        if counts.len() == 2 {
            let shape = |v: &DVector<f64>| -> Vec<Vec<f64>> {
                (0..counts[0])
                    .map(|r| (0..counts[1]).map(|c| v[r * counts[1] + c]).collect())
                    .collect()
            };
            artifacts.push(Artifact {
                filename: "truth.svg".into(),
                content: plot::heatmap(&shape(&f), "true reflectivity"),
            });
            artifacts.push(Artifact {
                filename: "estimate.svg".into(),
                content: plot::heatmap(&shape(&rec.estimate), "posterior mean"),
            });
        } else {
            let mut csv = String::from("patch,truth,estimate,posterior_std\n");
            for i in 0..f.len() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    i, f[i], rec.estimate[i], rec.posterior_std[i]
                ));
            }
            artifacts.push(Artifact { filename: "reconstruction.csv".into(), content: csv });
            let xs: Vec<f64> = (0..f.len()).map(|i| i as f64).collect();
            let series = vec![
                plot::Series {
                    name: "truth".into(),
                    points: xs.iter().copied().zip(f.iter().copied()).collect(),
                },
                plot::Series {
                    name: "estimate".into(),
                    points: xs.iter().copied().zip(rec.estimate.iter().copied()).collect(),
                },
                plot::Series {
                    name: "estimate+std".into(),
                    points: xs
                        .iter()
                        .copied()
                        .zip(rec.estimate.iter().zip(rec.posterior_std.iter()).map(|(e, s)| e + s))
                        .collect(),
                },
                plot::Series {
                    name: "estimate-std".into(),
                    points: xs
                        .iter()
                        .copied()
                        .zip(rec.estimate.iter().zip(rec.posterior_std.iter()).map(|(e, s)| e - s))
                        .collect(),
                },
            ];
            artifacts.push(Artifact {
                filename: "reconstruction.svg".into(),
                content: plot::line_plot(
                    &series,
                    &plot::Axes {
                        title: "reflectivity reconstruction".into(),
                        x_label: "patch index".into(),
                        y_label: "reflectivity".into(),
                        ..plot::Axes::default()
                    },
                ),
            });
        }
        // Raw-count raster map for wide-FOV plans.
        if let PlanConfig::WideFovRaster { raster, .. } = &config.plan {
            if raster.len() == 2 {
                let rows: Vec<Vec<f64>> = (0..raster[0])
                    .map(|r| (0..raster[1]).map(|c| y[r * raster[1] + c]).collect())
                    .collect();
                artifacts.push(Artifact {
                    filename: "raw_counts.svg".into(),
                    content: plot::heatmap(&rows, "raster intensity map"),
                });
                artifacts.push(Artifact {
                    filename: "raw_counts.csv".into(),
                    content: plot::matrix_csv(&rows),
                });
            }
        }
    }
    Ok(artifacts)
}

/// Run a full experiment: sweep expansion, parallel replications,
/// aggregation, artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let base_scene = config.scene.build()?;
    let (sweep_columns, points) = sweep_points(config);
    let value_columns = value_columns(config);

    // Priors depend only on the transverse patch layout, which no sweep
    // axis changes, so build one per sigma_f value up front.
    let patches = base_scene.hidden_patches();
    let mut priors = BTreeMap::new();
    let mut sigma_fs = vec![config.prior.sigma_f_sq];
    sigma_fs.extend(config.sweep.sigma_f_sq.iter().copied());
    for sf in sigma_fs {
        priors
            .entry(prior_key(sf))
            .or_insert(GaussianPrior::with_correlation_length(&patches, sf)?);
    }

    let cells: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|s| (0..config.replications).map(move |r| (s, r)))
        .collect();
    let outputs: Result<Vec<CellOutput>> = cells
        .par_iter()
        .map(|&(s, r)| {
            run_cell(&CellContext {
                config,
                base_scene: &base_scene,
                priors: &priors,
                sweep: points[s],
                replication: r,
            })
        })
        .collect();
    let outputs = outputs?;

    let mut rows = Vec::with_capacity(cells.len());
    let mut cell_millis = Vec::with_capacity(cells.len());
    for (&(s, r), out) in cells.iter().zip(outputs) {
        rows.push(ReportRow {
            sweep: points[s].values(),
            replication: r,
            seed: config.master_seed ^ r as u64,
            values: out.values,
        });
        cell_millis.push(out.millis);
    }
    let aggregates = ExperimentReport::aggregate(&sweep_columns, &value_columns, &rows);
    let artifacts = build_artifacts(config, &base_scene, &priors, &points[0])?;

    Ok(RunOutcome {
        report: ExperimentReport {
            provenance: Provenance {
                name: config.name.clone(),
                config_hash: config.hash(),
                master_seed: config.master_seed,
                code_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            sweep_columns,
            value_columns,
            rows,
            aggregates,
            artifacts,
        },
        cell_millis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_pattern_is_binary_and_upper_left() {
        let f = letter_pattern(24, 24);
        assert!(f.iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(f.iter().any(|&v| v == 1.0));
        // Lower-right quadrant stays empty.
        for r in 12..24 {
            for c in 12..24 {
                assert_eq!(f[r * 24 + c], 0.0);
            }
        }
    }

    #[test]
    fn xcorr_detects_known_shift() {
        let n = 100;
        let truth = DVector::from_fn(n, |i, _| ((i as f64) * 0.2).sin());
        // a[i] = truth[i + 5]
        let shifted = DVector::from_fn(n, |i, _| {
            if i + 5 < n {
                truth[i + 5]
            } else {
                0.0
            }
        });
        assert_eq!(xcorr_peak_lag(&shifted, &truth, 0.6, 20), 5);
        let back = DVector::from_fn(n, |i, _| if i >= 5 { truth[i - 5] } else { 0.0 });
        assert_eq!(xcorr_peak_lag(&back, &truth, 0.6, 20), -5);
    }

    #[test]
    fn pearson_basics() {
        let a = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let b = DVector::from_vec(vec![2.0, 4.0, 6.0]);
        assert!((pearson(&a, &b) - 1.0).abs() < 1e-12);
        let c = DVector::from_vec(vec![-1.0, -2.0, -3.0]);
        assert!((pearson(&a, &c) + 1.0).abs() < 1e-12);
    }
}
