//! Three-bounce forward model and measurement-operator assembly.
//!
//! A measurement probes the path laser → `l` → hidden patch `x` → `c` →
//! camera. Each hidden patch contributes its reflectivity weighted by
//! binary visibility, the Lambertian four-cosine factor, and inverse
//! square falloff on both legs:
//!
//! ```text
//! weight(x) = V(x,l) V(x,c) G(x,l,c) / (|x-l|^2 |x-c|^2) * area(x)
//! ```
//!
//! Time-resolved rows further gate the contribution to the elliptical
//! annulus of patches whose round-trip path length falls inside one time
//! bin. Wide field-of-view rows integrate the focused response over a
//! camera-facing region of the illumination wall.

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{visibility, Occluder, Point, SurfacePatch, Wall};

/// Vacuum speed of light in meters per second.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Illumination pulse shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Idealized instantaneous pulse.
    Delta,
    /// Rectangular pulse of the given width in seconds.
    Boxcar { width: f64 },
}

impl PulseShape {
    fn extra_span(self) -> f64 {
        match self {
            PulseShape::Delta => 0.0,
            PulseShape::Boxcar { width } => width,
        }
    }
}

/// One row of the measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementSpec {
    /// Focused laser spot and focused camera spot, time-integrated.
    FocusedPair { laser: Point, camera: Point },
    /// Focused pair with a time bin (1-based) of width `bin_width` seconds.
    FocusedPairTr {
        laser: Point,
        camera: Point,
        bin: usize,
        bin_width: f64,
    },
    /// Focused laser spot, unfocused detector at `detector` integrating
    /// over the wall region `fov`.
    WideFov {
        laser: Point,
        detector: Point,
        fov: Wall,
    },
}

impl MeasurementSpec {
    fn kind(&self) -> &'static str {
        match self {
            MeasurementSpec::FocusedPair { .. } => "focused",
            MeasurementSpec::FocusedPairTr { .. } => "focused-tr",
            MeasurementSpec::WideFov { .. } => "wide-fov",
        }
    }

    /// Short metadata string for CSV headers.
    pub fn describe(&self) -> String {
        match self {
            MeasurementSpec::FocusedPair { laser, camera } => {
                format!("focused l=({:.4},{:.4},{:.4}) c=({:.4},{:.4},{:.4})",
                    laser.x, laser.y, laser.z, camera.x, camera.y, camera.z)
            }
            MeasurementSpec::FocusedPairTr { laser, camera, bin, bin_width } => {
                format!(
                    "tr l=({:.4},{:.4},{:.4}) c=({:.4},{:.4},{:.4}) bin={} dt={:.3e}",
                    laser.x, laser.y, laser.z, camera.x, camera.y, camera.z, bin, bin_width
                )
            }
            MeasurementSpec::WideFov { laser, detector, .. } => {
                format!(
                    "widefov l=({:.4},{:.4},{:.4}) gamma=({:.4},{:.4},{:.4})",
                    laser.x, laser.y, laser.z, detector.x, detector.y, detector.z
                )
            }
        }
    }
}

/// Assembled linear operator with its row provenance.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    pub entries: DMatrix<f64>,
    pub specs: Vec<MeasurementSpec>,
}

impl MeasurementMatrix {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Row-major CSV dump with a metadata header, for external inspection.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# rows={} cols={}\n", self.nrows(), self.ncols()));
        for spec in &self.specs {
            out.push_str(&format!("# row: {}\n", spec.describe()));
        }
        for i in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols())
                .map(|j| format!("{:.17e}", self.entries[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Lambertian four-cosine reflectance factor for the path `l → x → c`.
///
/// Each factor is the cosine between a leg and the local surface normal,
/// oriented front-facing; any back-facing leg zeroes the product, so the
/// result lies in `[0, 1]`.
pub fn brdf_g(
    x: &Point,
    l: &Point,
    c: &Point,
    n_x: &Point,
    n_l: &Point,
    n_c: &Point,
) -> f64 {
    let xl = x - l;
    let xc = x - c;
    let r_l = xl.norm();
    let r_c = xc.norm();
    if r_l == 0.0 || r_c == 0.0 {
        return 0.0;
    }
    // Emission at l, incidence at x, exit at x, arrival at c.
    let cos_l = xl.dot(n_l) / r_l;
    let cos_xi = (-xl).dot(n_x) / r_l;
    let cos_xo = (-xc).dot(n_x) / r_c;
    let cos_c = xc.dot(n_c) / r_c;
    if cos_l <= 0.0 || cos_xi <= 0.0 || cos_xo <= 0.0 || cos_c <= 0.0 {
        return 0.0;
    }
    cos_l * cos_xi * cos_xo * cos_c
}

/// Wall-normal at illumination points; the parallel-wall scenes in this
/// crate always use `+w`.
const ILLUM_NORMAL: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);

/// Transport weight of one hidden patch for a focused pair, before any
/// time gating: `V G / (r_l^2 r_c^2) * area`. This single code path is
/// shared by the time-integrated and time-resolved rows so that summing
/// a pair's bins reproduces its time-integrated row exactly.
fn transport_coeff(
    patch: &SurfacePatch,
    l: &Point,
    c: &Point,
    occluders: &[Occluder],
) -> f64 {
    let x = &patch.center;
    let vis = visibility(x, l, occluders) * visibility(x, c, occluders);
    if vis == 0.0 {
        return 0.0;
    }
    let g = brdf_g(x, l, c, &patch.normal, &ILLUM_NORMAL, &ILLUM_NORMAL);
    if g == 0.0 {
        return 0.0;
    }
    let r_l2 = (x - l).norm_squared();
    let r_c2 = (x - c).norm_squared();
    g / (r_l2 * r_c2) * patch.area
}

/// Time-integrated row for a focused `(l, c)` pair.
pub fn nontr_row(
    l: &Point,
    c: &Point,
    patches: &[SurfacePatch],
    occluders: &[Occluder],
) -> DVector<f64> {
    DVector::from_fn(patches.len(), |n, _| transport_coeff(&patches[n], l, c, occluders))
}

/// Shared time axis for a batch of time-resolved pairs.
///
/// The origin is the first instant any third-bounce light from any patch
/// reaches any camera point of the batch: a single global shift, so all
/// rows of the batch live on one bin grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    /// Arrival time of the earliest third bounce, in seconds.
    pub origin: f64,
    /// Bin width in seconds.
    pub bin_width: f64,
    /// Number of bins covering every contribution of the batch.
    pub bins: usize,
}

impl TimeGrid {
    /// Grid covering all `(l, c)` pairs and all patches at resolution
    /// `bin_width`, with room for the trailing edge of `pulse`.
    pub fn span(
        pairs: &[(Point, Point)],
        patches: &[SurfacePatch],
        bin_width: f64,
        pulse: PulseShape,
    ) -> Result<TimeGrid> {
        if bin_width.is_nan() || bin_width <= 0.0 {
            return Err(Error::Config("bin width must be positive".into()));
        }
        if pairs.is_empty() || patches.is_empty() {
            return Err(Error::Empty("time grid needs pairs and patches".into()));
        }
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        for (l, c) in pairs {
            for p in patches {
                let t = ((p.center - l).norm() + (p.center - c).norm()) / SPEED_OF_LIGHT;
                t_min = t_min.min(t);
                t_max = t_max.max(t);
            }
        }
        let span = t_max - t_min + pulse.extra_span();
        let bins = (span / bin_width).floor() as usize + 1;
        Ok(TimeGrid { origin: t_min, bin_width, bins })
    }

    /// The same grid padded out to `bins` bins (for configured horizons
    /// longer than the geometric span).
    pub fn extended(self, bins: usize) -> TimeGrid {
        TimeGrid { bins: self.bins.max(bins), ..self }
    }

    /// Fraction of the pulse delayed by `arrival` that lands in `bin`
    /// (1-based). Bins are half-open `[(bin-1) dt, bin dt)` so each delta
    /// arrival belongs to exactly one bin.
    fn bin_weight(&self, arrival: f64, bin: usize, pulse: PulseShape) -> f64 {
        let rel = arrival - self.origin;
        let lo = (bin - 1) as f64 * self.bin_width;
        let hi = bin as f64 * self.bin_width;
        match pulse {
            PulseShape::Delta => {
                if rel >= lo && rel < hi {
                    1.0
                } else {
                    0.0
                }
            }
            PulseShape::Boxcar { width } => {
                let overlap = (rel + width).min(hi) - rel.max(lo);
                (overlap / width).clamp(0.0, 1.0)
            }
        }
    }
}

/// Time-resolved row: the focused-pair transport restricted to the
/// `bin`-th elliptical annulus of the shared grid.
pub fn tr_row(
    l: &Point,
    c: &Point,
    bin: usize,
    grid: &TimeGrid,
    patches: &[SurfacePatch],
    pulse: PulseShape,
    occluders: &[Occluder],
) -> Result<DVector<f64>> {
    if bin == 0 || bin > grid.bins {
        return Err(Error::BinPastHorizon { bin, horizon: grid.bins });
    }
    Ok(DVector::from_fn(patches.len(), |n, _| {
        let p = &patches[n];
        let arrival = ((p.center - l).norm() + (p.center - c).norm()) / SPEED_OF_LIGHT;
        let w = grid.bin_weight(arrival, bin, pulse);
        if w == 0.0 {
            0.0
        } else {
            // Delta weights are exactly 1, keeping the bin decomposition
            // a bit-exact partition of the time-integrated row.
            let coeff = transport_coeff(p, l, c, occluders);
            if w == 1.0 {
                coeff
            } else {
                coeff * w
            }
        }
    }))
}

/// Camera-side transport of a wide-FOV configuration: for each hidden
/// patch, the integral over the fov cells of visibility, exit/arrival
/// cosines, falloff, and the detector-leg gain. None of it depends on
/// the laser position, so one kernel serves every row of a raster.
struct WideFovKernel {
    camera_leg: Vec<f64>,
}

impl WideFovKernel {
    fn new(
        detector: &Point,
        fov: &Wall,
        patches: &[SurfacePatch],
        occluders: &[Occluder],
    ) -> Result<WideFovKernel> {
        if fov.patch_count() == 0 {
            return Err(Error::Empty("wide-FOV region has no cells".into()));
        }
        if detector.z == fov.depth() {
            return Err(Error::Geometry(
                "detector must sit off the illumination-wall plane".into(),
            ));
        }
        let cells = fov.patches();
        // Detector-leg factors depend only on the cell.
        let cell_gain: Vec<f64> = cells
            .iter()
            .map(|cell| {
                let gc = detector - cell.center;
                let r_gc = gc.norm();
                let cos_gc = gc.dot(&cell.normal) / r_gc;
                if cos_gc <= 0.0 {
                    0.0
                } else {
                    cos_gc / (r_gc * r_gc) * cell.area
                }
            })
            .collect();
        let camera_leg = patches
            .iter()
            .map(|p| {
                let x = &p.center;
                let mut acc = 0.0;
                for (cell, gain) in cells.iter().zip(&cell_gain) {
                    if *gain == 0.0 || visibility(x, &cell.center, occluders) == 0.0 {
                        continue;
                    }
                    let xc = x - cell.center;
                    let r_c = xc.norm();
                    let cos_xo = (-xc).dot(&p.normal) / r_c;
                    let cos_c = xc.dot(&cell.normal) / r_c;
                    if cos_xo <= 0.0 || cos_c <= 0.0 {
                        continue;
                    }
                    acc += cos_xo * cos_c / (r_c * r_c) * gain;
                }
                acc
            })
            .collect();
        Ok(WideFovKernel { camera_leg })
    }

    fn row(&self, l: &Point, patches: &[SurfacePatch], occluders: &[Occluder]) -> DVector<f64> {
        DVector::from_fn(patches.len(), |n, _| {
            let p = &patches[n];
            let x = &p.center;
            if visibility(x, l, occluders) == 0.0 {
                return 0.0;
            }
            let xl = x - l;
            let r_l = xl.norm();
            let cos_l = xl.dot(&ILLUM_NORMAL) / r_l;
            let cos_xi = (-xl).dot(&p.normal) / r_l;
            if cos_l <= 0.0 || cos_xi <= 0.0 {
                return 0.0;
            }
            let laser_leg = cos_l * cos_xi / (r_l * r_l);
            laser_leg * self.camera_leg[n] * p.area
        })
    }
}

/// Wide field-of-view row: focused laser at `l`, unfocused detector at
/// `detector` integrating the response over the wall region `fov`.
pub fn widefov_row(
    l: &Point,
    detector: &Point,
    fov: &Wall,
    patches: &[SurfacePatch],
    occluders: &[Occluder],
) -> Result<DVector<f64>> {
    Ok(WideFovKernel::new(detector, fov, patches, occluders)?.row(l, patches, occluders))
}

/// Stack per-spec rows into one operator. All specs of a batch must share
/// a kind, and time-resolved specs must share their bin width.
pub fn assemble_matrix(
    specs: &[MeasurementSpec],
    patches: &[SurfacePatch],
    occluders: &[Occluder],
) -> Result<MeasurementMatrix> {
    assemble_matrix_with_pulse(specs, patches, occluders, PulseShape::Delta)
}

/// [`assemble_matrix`] with an explicit pulse shape for time-resolved rows.
pub fn assemble_matrix_with_pulse(
    specs: &[MeasurementSpec],
    patches: &[SurfacePatch],
    occluders: &[Occluder],
    pulse: PulseShape,
) -> Result<MeasurementMatrix> {
    let n = patches.len();
    if specs.is_empty() {
        return Ok(MeasurementMatrix { entries: DMatrix::zeros(0, n), specs: Vec::new() });
    }
    let kind = specs[0].kind();
    if let Some(other) = specs.iter().find(|s| s.kind() != kind) {
        return Err(Error::MixedSpecs(format!("{kind} vs {}", other.kind())));
    }

    // Shared grid for TR batches: unique pairs in encounter order.
    let grid = if kind == "focused-tr" {
        let mut dt = None;
        let mut pairs: Vec<(Point, Point)> = Vec::new();
        let mut max_bin = 0usize;
        for spec in specs {
            if let MeasurementSpec::FocusedPairTr { laser, camera, bin, bin_width } = spec {
                match dt {
                    None => dt = Some(*bin_width),
                    Some(d) if d == *bin_width => {}
                    Some(d) => {
                        return Err(Error::MixedSpecs(format!(
                            "TR batch mixes bin widths {d} and {bin_width}"
                        )))
                    }
                }
                if !pairs.iter().any(|(pl, pc)| pl == laser && pc == camera) {
                    pairs.push((*laser, *camera));
                }
                max_bin = max_bin.max(*bin);
            }
        }
        // The batch's largest bin index is its configured horizon; bins
        // past the geometric span are legal and assemble to zero rows.
        Some(TimeGrid::span(&pairs, patches, dt.unwrap(), pulse)?.extended(max_bin))
    } else {
        None
    };

    // Rasters share one detector and region, so the laser-independent
    // camera-side kernel is computed once for the whole batch.
    let shared_kernel = match specs {
        [MeasurementSpec::WideFov { detector, fov, .. }, ..]
            if specs.iter().all(|s| {
                matches!(s, MeasurementSpec::WideFov { detector: d, fov: f, .. }
                    if d == detector && f == fov)
            }) =>
        {
            Some(WideFovKernel::new(detector, fov, patches, occluders)?)
        }
        _ => None,
    };

    let rows: Result<Vec<DVector<f64>>> = specs
        .par_iter()
        .map(|spec| match spec {
            MeasurementSpec::FocusedPair { laser, camera } => {
                Ok(nontr_row(laser, camera, patches, occluders))
            }
            MeasurementSpec::FocusedPairTr { laser, camera, bin, .. } => {
                tr_row(laser, camera, *bin, grid.as_ref().unwrap(), patches, pulse, occluders)
            }
            MeasurementSpec::WideFov { laser, detector, fov } => match &shared_kernel {
                Some(kernel) => Ok(kernel.row(laser, patches, occluders)),
                None => widefov_row(laser, detector, fov, patches, occluders),
            },
        })
        .collect();
    let rows = rows?;
    let mut entries = DMatrix::zeros(specs.len(), n);
    for (i, row) in rows.iter().enumerate() {
        entries.row_mut(i).copy_from(&row.transpose());
    }
    Ok(MeasurementMatrix { entries, specs: specs.to_vec() })
}

/// Specs for a full time-resolved batch over `pairs`, bin-major: the rows
/// for bin 1 across all pairs, then bin 2, and so on.
pub fn tr_specs(pairs: &[(Point, Point)], bins: usize, bin_width: f64) -> Vec<MeasurementSpec> {
    let mut specs = Vec::with_capacity(pairs.len() * bins);
    for bin in 1..=bins {
        for (l, c) in pairs {
            specs.push(MeasurementSpec::FocusedPairTr {
                laser: *l,
                camera: *c,
                bin,
                bin_width,
            });
        }
    }
    specs
}

/// Specs for a time-integrated batch over `pairs`.
pub fn focused_specs(pairs: &[(Point, Point)]) -> Vec<MeasurementSpec> {
    pairs
        .iter()
        .map(|(l, c)| MeasurementSpec::FocusedPair { laser: *l, camera: *c })
        .collect()
}
