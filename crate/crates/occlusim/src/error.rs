//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by scene construction, operator assembly, estimation and
/// the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A geometric object violates one of its construction invariants.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A time bin index lies past the configured horizon.
    #[error("time bin {bin} past horizon of {horizon} bins")]
    BinPastHorizon { bin: usize, horizon: usize },

    /// A measurement batch mixes spec kinds that cannot share one matrix.
    #[error("measurement specs in one batch must share a kind: {0}")]
    MixedSpecs(String),

    /// The linear system has no usable positive-definite factorization.
    #[error("ill-posed system: {0}")]
    IllPosed(String),

    /// Noise variance of zero where a finite SNR is required.
    #[error("infinite SNR: noise variance is zero")]
    InfiniteSnr,

    /// A zero measurement operator cannot be calibrated to a target SNR.
    #[error("zero operator: signal trace vanishes")]
    ZeroOperator,

    /// Candidate enumeration would exceed the combinatorial guard.
    #[error("exhaustive search over {subsets} subsets exceeds the guard of {guard}")]
    CombinatorialGuard { subsets: u128, guard: u128 },

    /// Empty candidate or measurement collection where at least one element
    /// is required.
    #[error("empty input: {0}")]
    Empty(String),

    /// A configuration file or preset name could not be interpreted.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A plot spec referenced a report column that does not exist.
    #[error("missing report column: {0}")]
    MissingColumn(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
