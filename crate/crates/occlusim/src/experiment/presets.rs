//! Built-in experiment presets.
//!
//! Each preset is a fully pinned parameter set for one of the standard
//! studies this crate supports: time-resolved baselines, the occlusion
//! benefit comparison, information-driven measurement selection, occluder
//! mismatch robustness, unknown-distance search, and the wide-FOV TV
//! study. Presets resolve to ordinary [`ExperimentConfig`] values (plus
//! one bespoke runner for the selection study), so `(preset, seed)`
//! reproduces byte-identical reports.

use crate::error::{Error, Result};
use crate::experiment::config::{
    ExperimentConfig, NoiseConfig, OccluderConfig, OutputConfig, PlanConfig, PriorConfig,
    SceneConfig, SolverConfig, SweepConfig, TruthConfig, WallConfig,
};
use crate::experiment::report::{Artifact, ExperimentReport, Provenance, ReportRow};
use crate::experiment::run::{run_experiment, RunOutcome};
use crate::geometry::{PlanarShape, Scene};
use crate::plot;
use crate::recon::nmse_predict;
use crate::rng::rng_from_seed;
use crate::select::{greedy_select, CandidateSet, SelectionResult};
use crate::stats::GaussianPrior;

fn wall_1d(counts: usize, depth: f64, normal: f64) -> WallConfig {
    WallConfig {
        origin: vec![0.0],
        extents: vec![1.0],
        counts: vec![counts],
        depth,
        normal,
    }
}

/// 2-D room, 1 m walls, hidden wall at `d` meters, `n` hidden patches.
fn room_2d(d: f64, n: usize, occluders: Vec<OccluderConfig>) -> SceneConfig {
    SceneConfig {
        dimension: 2,
        illumination_wall: wall_1d(n, 0.0, 1.0),
        hidden_wall: wall_1d(n, d, -1.0),
        occluders,
    }
}

fn slat_row(height: f64, start: f64, slats: usize, width: f64, gap: f64) -> OccluderConfig {
    let shapes = (0..slats)
        .map(|i| {
            let lo = start + i as f64 * (width + gap);
            PlanarShape::Interval { lo, hi: lo + width }
        })
        .collect();
    OccluderConfig::Flat { height, shapes }
}

/// The two slatted occluders of the occlusion-benefit scene: each is a
/// row of absorbing patches on one plane. The many shadow edges they
/// cast encode fine spatial structure while passing roughly half the
/// light, which is what makes coarse-time-bin imaging work.
pub fn paired_band_occluders() -> Vec<OccluderConfig> {
    vec![
        // Centered around 0.5 m, 1.5 m from the illumination wall.
        slat_row(1.5, 0.30, 4, 0.05, 0.05),
        // Right-side row closer to the illumination wall.
        slat_row(1.2, 0.70, 3, 0.05, 0.05),
    ]
}

/// The single occluder (centered near 0.5 m) used by the selection study.
pub fn single_band_occluder() -> Vec<OccluderConfig> {
    vec![slat_row(1.5, 0.30, 4, 0.05, 0.05)]
}

/// Two-occluder room: the scene of the occlusion-benefit, combined
/// TR+occluder, and distance-search studies.
pub fn two_occluder_room(d: f64, n: usize) -> Result<Scene> {
    room_2d(d, n, paired_band_occluders()).build()
}

/// One-occluder room used by the measurement-selection study.
pub fn one_occluder_room(n: usize) -> Result<Scene> {
    room_2d(2.0, n, single_band_occluder()).build()
}

/// Far-field room with a narrow occluder, for mismatch robustness.
pub fn far_field_room(n: usize) -> Result<Scene> {
    room_2d(
        5.0,
        n,
        vec![OccluderConfig::Flat {
            height: 2.0,
            shapes: vec![PlanarShape::Interval { lo: 0.375, hi: 0.625 }],
        }],
    )
    .build()
}

/// Geometry of the wide-FOV study: 1 m square walls 1.06 m apart, a
/// 3.4 cm disc occluder 0.37 m from the illumination wall, detector
/// 1.56 m from it.
pub fn widefov_scene_config(full_size: bool) -> SceneConfig {
    let hidden = if full_size { 48 } else { 24 };
    SceneConfig {
        dimension: 3,
        illumination_wall: WallConfig {
            origin: vec![0.0, 0.0],
            extents: vec![1.0, 1.0],
            counts: vec![32, 32],
            depth: 0.0,
            normal: 1.0,
        },
        hidden_wall: WallConfig {
            origin: vec![0.0, 0.0],
            extents: vec![1.0, 1.0],
            counts: vec![hidden, hidden],
            depth: 1.06,
            normal: -1.0,
        },
        occluders: vec![OccluderConfig::Flat {
            height: 0.37,
            shapes: vec![PlanarShape::Disc { center: (0.3, 0.45), radius: 0.017 }],
        }],
    }
}

/// Names accepted by [`preset_config`] and the CLI.
pub fn preset_names() -> &'static [&'static str] {
    &[
        "tr-demo",
        "tr-resolution-sweep",
        "tr-distance-sweep",
        "occlusion-benefit",
        "greedy-selection",
        "tr-occluder-sweep",
        "occluder-mismatch",
        "depth-search",
        "widefov-tv",
    ]
}

/// Log-style bin-width grid from 50 ps to 2 ns.
pub fn bin_width_grid() -> Vec<f64> {
    vec![50e-12, 100e-12, 200e-12, 400e-12, 800e-12, 1600e-12, 2000e-12]
}

/// Build the configuration of a named preset. `greedy-selection` has a
/// bespoke runner and no single config; use [`run_preset`] for it.
pub fn preset_config(name: &str, master_seed: u64, full_size: bool) -> Result<ExperimentConfig> {
    let cfg = match name {
        "tr-demo" => ExperimentConfig {
            name: name.into(),
            scene: room_2d(2.0, 100, vec![]),
            plan: PlanConfig::TimeResolved {
                count: 8,
                grid: 100,
                bin_width_s: 100e-12,
                bins: Some(16),
            },
            prior: PriorConfig { sigma_f_sq: 0.1 },
            noise: NoiseConfig::TargetSnrDb(13.7),
            solver: SolverConfig::Mmse,
            sweep: SweepConfig::default(),
            replications: 1,
            master_seed,
            baseline_unoccluded: false,
            truth: TruthConfig::PriorDraw,
            outputs: OutputConfig {
                dump_matrices: true,
                dump_singular_values: false,
                dump_reconstruction: true,
            },
        },
        "tr-resolution-sweep" => ExperimentConfig {
            name: name.into(),
            scene: room_2d(2.0, 100, vec![]),
            plan: PlanConfig::TimeResolved {
                count: 30,
                grid: 100,
                bin_width_s: 100e-12,
                bins: None,
            },
            prior: PriorConfig { sigma_f_sq: 0.1 },
            noise: NoiseConfig::TargetSnrDb(20.0),
            solver: SolverConfig::Mmse,
            sweep: SweepConfig {
                bin_width_s: bin_width_grid(),
                snr_db: vec![10.0, 20.0, 30.0],
                ..SweepConfig::default()
            },
            replications: 10,
            master_seed,
            baseline_unoccluded: false,
            truth: TruthConfig::PriorDraw,
            outputs: OutputConfig::default(),
        },
        "tr-distance-sweep" => ExperimentConfig {
            name: name.into(),
            scene: room_2d(2.0, 100, vec![]),
            plan: PlanConfig::TimeResolved {
                count: 30,
                grid: 100,
                bin_width_s: 100e-12,
                bins: None,
            },
            prior: PriorConfig { sigma_f_sq: 0.1 },
            noise: NoiseConfig::TargetSnrDb(20.0),
            solver: SolverConfig::Mmse,
            sweep: SweepConfig {
                bin_width_s: bin_width_grid(),
                separation_m: vec![1.0, 2.0, 4.0],
                ..SweepConfig::default()
            },
            replications: 10,
            master_seed,
            baseline_unoccluded: false,
            truth: TruthConfig::PriorDraw,
            outputs: OutputConfig::default(),
        },
        "occlusion-benefit" => ExperimentConfig {
            name: name.into(),
            scene: room_2d(2.0, 100, paired_band_occluders()),
            plan: PlanConfig::RandomPairs { count: 30, grid: 100, coincident_only: false },
            prior: PriorConfig { sigma_f_sq: 0.1 },
            noise: NoiseConfig::TargetSnrDb(25.0),
            solver: SolverConfig::Mmse,
            sweep: SweepConfig::default(),
            replications: 50,
            master_seed,
            baseline_unoccluded: true,
            truth: TruthConfig::PriorDraw,
            outputs: OutputConfig {
                dump_matrices: true,
                dump_singular_values: true,
                dump_reconstruction: true,
            },
        },
        "tr-occluder-sweep" => ExperimentConfig {
            name: name.into(),
            scene: room_2d(2.0, 100, paired_band_occluders()),
            plan: PlanConfig::TimeResolved {
                count: 30,
                grid: 100,
                bin_width_s: 100e-12,
                bins: None,
            },
            prior: PriorConfig { sigma_f_sq: 0.03 },
            noise: NoiseConfig::TargetSnrDb(10.0),
            solver: SolverConfig::Mmse,
            sweep: SweepConfig {
                bin_width_s: vec![50e-12, 100e-12, 200e-12, 400e-12, 800e-12, 1600e-12],
                ..SweepConfig::default()
            },
            replications: 10,
            master_seed,
            baseline_unoccluded: true,
            truth: TruthConfig::PriorDraw,
            outputs: OutputConfig::default(),
        },
        "occluder-mismatch" => ExperimentConfig {
            name: name.into(),
            scene: room_2d(
                5.0,
                100,
                vec![OccluderConfig::Flat {
                    height: 2.0,
                    shapes: vec![PlanarShape::Interval { lo: 0.375, hi: 0.625 }],
                }],
            ),
            plan: PlanConfig::RandomPairs { count: 150, grid: 100, coincident_only: false },
            prior: PriorConfig { sigma_f_sq: 0.03 },
            noise: NoiseConfig::TargetSnrDb(35.0),
            solver: SolverConfig::Mmse,
            sweep: SweepConfig {
                mismatch: vec![(0.0, 0.0), (0.02, 0.0), (0.0, 0.05), (0.02, 0.05), (0.04, 0.1)],
                ..SweepConfig::default()
            },
            replications: 10,
            master_seed,
            baseline_unoccluded: false,
            truth: TruthConfig::PriorDraw,
            outputs: OutputConfig::default(),
        },
        "depth-search" => ExperimentConfig {
            name: name.into(),
            scene: room_2d(2.0, 100, paired_band_occluders()),
            plan: PlanConfig::RandomPairs { count: 30, grid: 100, coincident_only: false },
            prior: PriorConfig { sigma_f_sq: 0.05 },
            noise: NoiseConfig::TargetSnrDb(25.0),
            solver: SolverConfig::DepthSearch {
                candidates: (0..9).map(|i| 1.6 + 0.1 * i as f64).collect(),
                full_evidence: false,
            },
            sweep: SweepConfig {
                snr_db: vec![10.0, 20.0, 25.0, 30.0, 35.0],
                ..SweepConfig::default()
            },
            replications: 200,
            master_seed,
            baseline_unoccluded: false,
            truth: TruthConfig::PriorDraw,
            outputs: OutputConfig::default(),
        },
        "widefov-tv" => ExperimentConfig {
            name: name.into(),
            scene: widefov_scene_config(full_size),
            plan: PlanConfig::WideFovRaster {
                raster: if full_size { vec![100, 100] } else { vec![32, 32] },
                detector: vec![1.25, 0.5, 1.56],
                fov: WallConfig {
                    origin: vec![0.0, 0.0],
                    extents: vec![0.5, 1.0],
                    counts: if full_size { vec![25, 50] } else { vec![12, 24] },
                    depth: 0.0,
                    normal: 1.0,
                },
            },
            prior: PriorConfig { sigma_f_sq: 0.02 },
            noise: NoiseConfig::TargetSnrDb(30.0),
            solver: SolverConfig::Tv {
                lambda: 6e-9,
                max_iters: 3000,
                tol: 1e-10,
                compare_mmse: true,
            },
            sweep: SweepConfig::default(),
            replications: 1,
            master_seed,
            baseline_unoccluded: false,
            truth: TruthConfig::LetterPattern,
            outputs: OutputConfig {
                dump_matrices: false,
                dump_singular_values: false,
                dump_reconstruction: true,
            },
        },
        "greedy-selection" => {
            return Err(Error::Config(
                "greedy-selection uses a bespoke runner; call run_preset".into(),
            ))
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; available: {}",
                preset_names().join(", ")
            )))
        }
    };
    Ok(cfg)
}

/// Run a preset by name.
pub fn run_preset(name: &str, master_seed: u64, full_size: bool) -> Result<RunOutcome> {
    if name == "greedy-selection" {
        return run_selection_preset(master_seed);
    }
    let config = preset_config(name, master_seed, full_size)?;
    run_experiment(&config)
}

/// Selection-study CSV: one row per greedy pick.
pub fn selection_csv(cands: &CandidateSet, result: &SelectionResult) -> String {
    let mut out = String::from("iteration,l,c,phi\n");
    for (it, (&idx, phi)) in result.selected.iter().zip(&result.objective).enumerate() {
        let (l, c) = cands.pairs()[idx];
        out.push_str(&format!("{},{},{},{}\n", it + 1, l.x, c.x, phi));
    }
    out
}

/// Greedy-vs-random measurement selection study: a bespoke runner
/// because it compares two plans over a budget sweep.
///
/// Scene: one band occluder, fixed noise variance 0.1, a 24-point
/// illumination grid (576 candidate pairs), budgets 2..=30, priors at
/// three smoothness levels, random baseline averaged over 30 draws.
fn run_selection_preset(master_seed: u64) -> Result<RunOutcome> {
    let start = std::time::Instant::now();
    let grid = 24;
    let budget_max = 30;
    let random_draws = 30;
    let sigma_sq = 0.1;
    let sigma_fs = [0.05, 0.1, 0.2];

    let scene = one_occluder_room(100)?;
    let patches = scene.hidden_patches();
    let cands = CandidateSet::from_grid(&scene, grid, false)?;

    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    for (sf_idx, &sigma_f) in sigma_fs.iter().enumerate() {
        let prior = GaussianPrior::with_correlation_length(&patches, sigma_f)?;
        let greedy = greedy_select(&cands, budget_max, &prior, sigma_sq, false)?;

        // Random baseline: nested prefixes of 30-pair draws.
        let mut random_sets = Vec::with_capacity(random_draws);
        for r in 0..random_draws {
            let mut rng = rng_from_seed(master_seed ^ r as u64);
            let picks = crate::rng::sample_distinct(&mut rng, cands.len(), budget_max);
            random_sets.push(picks);
        }

        for k in 2..=budget_max {
            let a_greedy = cands.operator(&greedy.selected[..k]);
            let nmse_greedy = nmse_predict(&a_greedy, &prior, sigma_sq)?;
            let mut nmse_random = 0.0;
            for picks in &random_sets {
                let a_rand = cands.operator(&picks[..k]);
                nmse_random += nmse_predict(&a_rand, &prior, sigma_sq)?;
            }
            nmse_random /= random_draws as f64;
            rows.push(ReportRow {
                sweep: vec![sigma_f, k as f64],
                replication: 0,
                seed: master_seed,
                values: vec![
                    nmse_greedy,
                    nmse_random,
                    greedy.objective[k - 1],
                ],
            });
        }

        if sf_idx == 1 {
            // Scatter of the selection order on the (l, c) plane.
            let background: Vec<(f64, f64)> =
                cands.pairs().iter().map(|(l, c)| (l.x, c.x)).collect();
            let marks: Vec<(f64, f64, String)> = greedy
                .selected
                .iter()
                .enumerate()
                .map(|(it, &idx)| {
                    let (l, c) = cands.pairs()[idx];
                    (l.x, c.x, format!("{}", it + 1))
                })
                .collect();
            artifacts.push(Artifact {
                filename: "selection_order.svg".into(),
                content: plot::scatter(
                    &background,
                    &marks,
                    &plot::Axes {
                        title: "greedy selection order".into(),
                        x_label: "laser position (m)".into(),
                        y_label: "camera position (m)".into(),
                        ..plot::Axes::default()
                    },
                ),
            });
            artifacts.push(Artifact {
                filename: "selection_order.csv".into(),
                content: selection_csv(&cands, &greedy),
            });
        }
    }

    let sweep_columns = vec!["sigma_f_sq".to_string(), "budget".to_string()];
    let value_columns = vec![
        "nmse_greedy".to_string(),
        "nmse_random_mean".to_string(),
        "phi_greedy".to_string(),
    ];

    // NMSE-vs-budget curves, one pair of lines per prior smoothness.
    let mut series = Vec::new();
    for &sigma_f in &sigma_fs {
        for (col, suffix) in [(0usize, "greedy"), (1usize, "random")] {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.sweep[0] == sigma_f)
                .map(|r| (r.sweep[1], r.values[col]))
                .collect();
            series.push(plot::Series { name: format!("{suffix} sf2={sigma_f}"), points });
        }
    }
    artifacts.push(Artifact {
        filename: "nmse_vs_budget.svg".into(),
        content: plot::line_plot(
            &series,
            &plot::Axes {
                title: "reconstruction error vs measurement budget".into(),
                x_label: "budget".into(),
                y_label: "NMSE".into(),
                ..plot::Axes::default()
            },
        ),
    });

    let aggregates = ExperimentReport::aggregate(&sweep_columns, &value_columns, &rows);
    let n_rows = rows.len();
    Ok(RunOutcome {
        report: ExperimentReport {
            provenance: Provenance {
                name: "greedy-selection".into(),
                config_hash: format!("{master_seed:016x}"),
                master_seed,
                code_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            sweep_columns,
            value_columns,
            rows,
            aggregates,
            artifacts,
        },
        cell_millis: vec![start.elapsed().as_secs_f64() * 1e3 / n_rows as f64; n_rows],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_resolve() {
        for name in preset_names() {
            if *name == "greedy-selection" {
                continue;
            }
            for full_size in [false, true] {
                let cfg = preset_config(name, 7, full_size).unwrap();
                cfg.validate().unwrap();
            }
        }
        assert!(preset_config("no-such-preset", 7, false).is_err());
    }

    #[test]
    fn preset_configs_are_stable_under_round_trip() {
        let cfg = preset_config("occlusion-benefit", 3, false).unwrap();
        let json = cfg.to_json();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(cfg.hash(), back.hash());
    }
}
