//! Occlusion-aided non-line-of-sight imaging toolkit.
//!
//! This crate simulates three-bounce light transport in rooms whose
//! direct view of a hidden wall is blocked, and solves the resulting
//! linear inverse problem for the hidden wall's reflectivity. Its core
//! observation: opaque occluders between the walls, usually a nuisance,
//! structure the measurement operator so well that coarse-time or fully
//! time-integrated measurements suffice for sharp reconstruction.
//!
//! The pieces:
//!
//! - [`geometry`]: walls, occluders, and binary visibility, both by
//!   generic ray intersection and by the flat-occluder closed form.
//! - [`forward`]: measurement operators: time-integrated, time-resolved
//!   (elliptical-annulus gating), and wide field-of-view rows.
//! - [`stats`]: the Gaussian reflectivity prior, noise calibration, and
//!   synthetic measurement generation.
//! - [`recon`]: MMSE estimation with posterior uncertainty, predicted
//!   NMSE, TV-regularized reconstruction, occluder-mismatch spectra, and
//!   unknown-distance search.
//! - [`select`]: greedy information-optimal selection of measurement
//!   pairs, with an exhaustive oracle for small instances.
//! - [`experiment`]: a config-driven harness with named presets,
//!   deterministic seeding, CSV reports, and SVG plots.
//!
//! # Example
//!
//! Reconstruct a hidden wall through a band occluder from thirty
//! time-integrated measurements:
//!
//! ```
//! use occlusim::forward::{assemble_matrix, focused_specs};
//! use occlusim::geometry::{pt2, Dim, FlatOccluder, Occluder, Scene, Wall};
//! use occlusim::recon::mmse;
//! use occlusim::rng::rng_from_seed;
//! use occlusim::stats::{noise_for_target_snr, simulate_measurements, GaussianPrior};
//! use rand::Rng;
//!
//! // A 1 m illumination wall facing a 1 m hidden wall 2 m away, with an
//! // absorbing band 1.5 m into the room.
//! let illumination = Wall::span_2d(0.0, 1.0, 0.0, 100, 1.0)?;
//! let hidden = Wall::span_2d(0.0, 1.0, 2.0, 100, -1.0)?;
//! let occluder = Occluder::Flat(FlatOccluder::band(1.5, 0.4, 0.6)?);
//! let scene = Scene::new(Dim::Two, illumination, hidden, vec![occluder])?;
//!
//! // Thirty random laser/camera pairs on the illumination wall.
//! let mut rng = rng_from_seed(1);
//! let pairs: Vec<_> = (0..30)
//!     .map(|_| (pt2(rng.random(), 0.0), pt2(rng.random(), 0.0)))
//!     .collect();
//! let patches = scene.hidden_patches();
//! let a = assemble_matrix(&focused_specs(&pairs), &patches, scene.occluders())?.entries;
//!
//! // Draw a smooth reflectivity, measure it at 25 dB, reconstruct.
//! let prior = GaussianPrior::with_correlation_length(&patches, 0.1)?;
//! let truth = prior.sample_with(&mut rng);
//! let sigma_sq = noise_for_target_snr(&a, &prior, 25.0)?;
//! let y = simulate_measurements(&a, &truth, sigma_sq, 2)?;
//! let recon = mmse(&a, &y, &prior, sigma_sq)?;
//!
//! assert!(recon.nmse < 0.2, "occluded scene reconstructs well");
//! assert_eq!(recon.estimate.len(), 100);
//! # Ok::<(), occlusim::Error>(())
//! ```

pub mod book;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod geometry;
pub mod linalg;
pub mod plot;
pub mod recon;
pub mod select;
pub mod rng;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
