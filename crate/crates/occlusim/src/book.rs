//! The narrative guide (`book/`), included chapter by chapter so every
//! code sample in it compiles and runs under `cargo test --doc`. The
//! rendered book and the tested snippets are the same files.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/scene-geometry.md")]
pub mod scene_geometry {}

#[doc = include_str!("../../../book/src/forward-model.md")]
pub mod forward_model {}

#[doc = include_str!("../../../book/src/bayesian-reconstruction.md")]
pub mod bayesian_reconstruction {}

#[doc = include_str!("../../../book/src/measurement-selection.md")]
pub mod measurement_selection {}

#[doc = include_str!("../../../book/src/tv-and-robustness.md")]
pub mod tv_and_robustness {}

#[doc = include_str!("../../../book/src/experiments-cli.md")]
pub mod experiments_cli {}
