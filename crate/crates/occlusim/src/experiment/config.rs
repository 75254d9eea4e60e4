//! JSON-facing experiment configuration.
//!
//! A config names a scene, a measurement plan, prior and noise levels, a
//! solver, optional sweep axes, and the replication/seed bookkeeping.
//! Everything an experiment consumes flows through this structure so a
//! `(config, master_seed)` pair pins the full output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    pt2, pt3, Dim, FlatOccluder, GeneralOccluder, Occluder, PlanarShape, Point, Primitive,
    Scene, Wall,
};

/// Top-level experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub scene: SceneConfig,
    pub plan: PlanConfig,
    pub prior: PriorConfig,
    pub noise: NoiseConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub replications: usize,
    pub master_seed: u64,
    /// Also solve each draw against the occluder-free operator and record
    /// the baseline columns.
    #[serde(default)]
    pub baseline_unoccluded: bool,
    /// Ground-truth source for synthetic measurements.
    #[serde(default)]
    pub truth: TruthConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if let NoiseConfig::SigmaSq(v) = self.noise {
            crate::stats::NoiseModel::new(v)?;
        }
        self.scene.build()?;
        if let SolverConfig::DepthSearch { candidates, .. } = &self.solver {
            if candidates.is_empty() {
                return Err(Error::Config("depth search needs candidates".into()));
            }
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical JSON, for provenance blocks.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in canonical.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// Scene description: axis-aligned walls plus occluders, meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneConfig {
    /// 2 or 3.
    pub dimension: u8,
    pub illumination_wall: WallConfig,
    pub hidden_wall: WallConfig,
    #[serde(default)]
    pub occluders: Vec<OccluderConfig>,
}

impl SceneConfig {
    pub fn dim(&self) -> Result<Dim> {
        match self.dimension {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            d => Err(Error::Config(format!("dimension must be 2 or 3, got {d}"))),
        }
    }

    pub fn build(&self) -> Result<Scene> {
        let dim = self.dim()?;
        let illum = self.illumination_wall.build(dim, 1.0)?;
        let hidden = self.hidden_wall.build(dim, -1.0)?;
        let occluders: Result<Vec<Occluder>> =
            self.occluders.iter().map(|o| o.build(dim)).collect();
        Scene::new(dim, illum, hidden, occluders?)
    }
}

/// Axis-aligned wall: transverse origin, per-axis extents and cell
/// counts, depth along the room axis, and the sign of the outward normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WallConfig {
    /// Transverse origin: `[u]` for 2-D scenes, `[u, v]` for 3-D.
    pub origin: Vec<f64>,
    pub extents: Vec<f64>,
    pub counts: Vec<usize>,
    /// Depth of the wall plane in meters.
    pub depth: f64,
    /// Outward normal along the depth axis: +1 faces deeper, -1 faces back.
    pub normal: f64,
}

impl WallConfig {
    fn build(&self, dim: Dim, default_normal: f64) -> Result<Wall> {
        let axes = dim.transverse_axes();
        if self.origin.len() != axes || self.extents.len() != axes || self.counts.len() != axes {
            return Err(Error::Config(format!(
                "wall origin/extents/counts must have {axes} transverse components"
            )));
        }
        let normal = if self.normal == 0.0 { default_normal } else { self.normal };
        match dim {
            Dim::Two => Wall::span_2d(self.origin[0], self.extents[0], self.depth, self.counts[0], normal),
            Dim::Three => Wall::span_3d(
                (self.origin[0], self.origin[1]),
                (self.extents[0], self.extents[1]),
                self.depth,
                (self.counts[0], self.counts[1]),
                normal,
            ),
        }
    }
}

/// Occluder description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OccluderConfig {
    /// Flat occluder: plane height plus occupied shapes.
    Flat { height: f64, shapes: Vec<PlanarShape> },
    /// Explicit absorbing primitives.
    General { primitives: Vec<PrimitiveConfig> },
}

impl OccluderConfig {
    pub fn build(&self, dim: Dim) -> Result<Occluder> {
        match self {
            OccluderConfig::Flat { height, shapes } => {
                Ok(Occluder::Flat(FlatOccluder::new(*height, shapes.clone())?))
            }
            OccluderConfig::General { primitives } => {
                let prims: Result<Vec<Primitive>> =
                    primitives.iter().map(|p| p.build(dim)).collect();
                Ok(Occluder::General(GeneralOccluder::new(prims?)?))
            }
        }
    }
}

/// Primitive description for general occluders.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PrimitiveConfig {
    Segment { a: Vec<f64>, b: Vec<f64> },
    Rect { depth: f64, u: (f64, f64), v: (f64, f64) },
    Disc { center: Vec<f64>, normal: Vec<f64>, radius: f64 },
}

pub(crate) fn point_from_components(dim: Dim, comps: &[f64]) -> Result<Point> {
    match (dim, comps.len()) {
        (Dim::Two, 2) => Ok(pt2(comps[0], comps[1])),
        (Dim::Three, 3) => Ok(pt3(comps[0], comps[1], comps[2])),
        _ => Err(Error::Config(format!(
            "point needs {} components, got {}",
            dim.transverse_axes() + 1,
            comps.len()
        ))),
    }
}

impl PrimitiveConfig {
    fn build(&self, dim: Dim) -> Result<Primitive> {
        match self {
            PrimitiveConfig::Segment { a, b } => Ok(Primitive::Segment {
                a: point_from_components(dim, a)?,
                b: point_from_components(dim, b)?,
            }),
            PrimitiveConfig::Rect { depth, u, v } => {
                Ok(Primitive::Rect { depth: *depth, u: *u, v: *v })
            }
            PrimitiveConfig::Disc { center, normal, radius } => {
                let n = point_from_components(dim, normal)?;
                Ok(Primitive::Disc {
                    center: point_from_components(dim, center)?,
                    normal: n / n.norm(),
                    radius: *radius,
                })
            }
        }
    }
}

/// Measurement plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanConfig {
    /// Explicit focused pairs: each entry is `[l..., c...]` components.
    ExplicitPairs { pairs: Vec<Vec<f64>> },
    /// `count` distinct focused pairs drawn uniformly from a `grid`-point
    /// product set on the illumination wall.
    RandomPairs {
        count: usize,
        grid: usize,
        #[serde(default)]
        coincident_only: bool,
    },
    /// Greedy information-optimal pairs from the same grid.
    GreedyPairs {
        count: usize,
        grid: usize,
        #[serde(default)]
        coincident_only: bool,
        #[serde(default)]
        lazy: bool,
    },
    /// Time-resolved batch over random pairs at `bin_width_s` resolution.
    TimeResolved {
        count: usize,
        grid: usize,
        bin_width_s: f64,
        /// Optional horizon override (bins); the geometric span otherwise.
        #[serde(default)]
        bins: Option<usize>,
    },
    /// Wide field-of-view raster: one row per laser grid point.
    WideFovRaster {
        /// Laser raster counts per transverse axis.
        raster: Vec<usize>,
        /// Detector position (full point, `[u, w]` or `[u, v, w]`).
        detector: Vec<f64>,
        /// Camera-facing wall region with its own discretization.
        fov: WallConfig,
    },
}

/// Prior parameters. The harness reads the smoothness value as the
/// prior correlation length in meters (squared-exponential profile
/// `exp(-d^2 / (2 l^2))`); 0.1 gives fields with roughly ten independent
/// features per meter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorConfig {
    pub sigma_f_sq: f64,
}

/// Noise parameterization: a fixed variance or a target SNR.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConfig {
    SigmaSq(f64),
    TargetSnrDb(f64),
}

/// Solver choice.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverConfig {
    Mmse,
    Tv {
        lambda: f64,
        max_iters: usize,
        tol: f64,
        /// Also record the Gaussian-prior MMSE estimate on the same data.
        #[serde(default)]
        compare_mmse: bool,
    },
    DepthSearch {
        candidates: Vec<f64>,
        #[serde(default)]
        full_evidence: bool,
    },
}

/// Ground truth used to synthesize measurements.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthConfig {
    /// Draw from the Gaussian prior (per replication).
    #[default]
    PriorDraw,
    /// Deterministic blocky glyph covering part of the hidden wall,
    /// binary 0/1.
    LetterPattern,
    /// Deterministic piecewise-constant profile (2-D scenes).
    PiecewiseConstant,
}

/// Sweep axes; empty axes do not vary. The report gets one column per
/// active axis and the runner crosses all active axes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Time-bin widths in seconds (time-resolved plans only).
    #[serde(default)]
    pub bin_width_s: Vec<f64>,
    /// Wall separations in meters.
    #[serde(default)]
    pub separation_m: Vec<f64>,
    /// Target SNRs in dB (overrides the noise block).
    #[serde(default)]
    pub snr_db: Vec<f64>,
    /// Measurement budgets (random/greedy plans only).
    #[serde(default)]
    pub budget: Vec<usize>,
    /// Occluder displacement `(delta_x_m, delta_h_m)` assumed by the
    /// solver while the data comes from the true scene.
    #[serde(default)]
    pub mismatch: Vec<(f64, f64)>,
    /// Prior spatial variances.
    #[serde(default)]
    pub sigma_f_sq: Vec<f64>,
}

impl SweepConfig {
    pub fn is_static(&self) -> bool {
        self.bin_width_s.is_empty()
            && self.separation_m.is_empty()
            && self.snr_db.is_empty()
            && self.budget.is_empty()
            && self.mismatch.is_empty()
            && self.sigma_f_sq.is_empty()
    }
}

/// Extra artifact switches.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    /// Dump assembled measurement matrices (first replication) as CSV and
    /// heatmap SVG.
    #[serde(default)]
    pub dump_matrices: bool,
    /// Dump the per-matrix singular values (first replication).
    #[serde(default)]
    pub dump_singular_values: bool,
    /// Dump the first replication's truth/estimate profiles.
    #[serde(default)]
    pub dump_reconstruction: bool,
}
