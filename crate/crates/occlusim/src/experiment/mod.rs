//! Config-driven experiment harness: reproducible runs, reports, presets.

pub mod config;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{
    ExperimentConfig, NoiseConfig, OccluderConfig, OutputConfig, PlanConfig, PriorConfig,
    SceneConfig, SolverConfig, SweepConfig, TruthConfig, WallConfig,
};
pub use presets::{preset_config, preset_names, run_preset};
pub use report::{Artifact, CsvTable, ExperimentReport, Provenance, ReportRow};
pub use run::{
    displaced_scene, letter_pattern, pearson, piecewise_profile, run_experiment, xcorr_peak_lag,
    RunOutcome,
};
