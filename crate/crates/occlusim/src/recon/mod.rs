//! Inverse-problem solvers: Bayesian MMSE with posterior uncertainty,
//! TV-regularized least squares, unknown-distance search, and the
//! spectral model of occluder-position mismatch.

mod depth;
mod mismatch;
mod mmse;
mod tv;

pub use depth::{depth_search, DepthSearchResult, NllMode};
pub use mismatch::{mismatch_spectrum, MismatchParams};
pub use mmse::{gaussian_nll, measurement_quad_form, mmse, nmse_predict, ReconstructionResult};
pub use tv::{tv_reconstruct, GridShape, TvOptions, TvResult};
