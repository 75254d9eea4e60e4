//! Scene geometry: walls, occluders, and line-of-sight evaluation.
//!
//! The coordinate convention is shared by the whole crate: a point is
//! `(u, v, w)` where `u, v` are transverse coordinates and `w` is depth.
//! The illumination wall lies in the plane `w = 0` with its normal pointing
//! into the room (`+w`), the hidden wall lies in `w = D` facing back
//! (`-w`), and flat occluders live on intermediate planes `w = H` with
//! `0 < H < D`. Two-dimensional scenes simply fix `v = 0` everywhere.
//!
//! Occlusion is resolved by a binary visibility predicate: a hidden-wall
//! point and an illumination-wall point see each other iff the open segment
//! between them misses every absorbing primitive. A segment that merely
//! grazes an occluder boundary counts as *not* blocked; every containment
//! test below is strict-interior for that reason.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial point or direction, `(u, v, w)` with `w` the depth axis.
pub type Point = Vector3<f64>;

/// Point in a two-dimensional world (transverse `u`, depth `w`).
pub fn pt2(u: f64, w: f64) -> Point {
    Vector3::new(u, 0.0, w)
}

/// Point in a three-dimensional world.
pub fn pt3(u: f64, v: f64, w: f64) -> Point {
    Vector3::new(u, v, w)
}

/// World dimensionality. Every object in one scene shares it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    /// Number of transverse axes (1 for a planar world, 2 for a volumetric one).
    pub fn transverse_axes(self) -> usize {
        match self {
            Dim::Two => 1,
            Dim::Three => 2,
        }
    }
}

const UNIT_TOL: f64 = 1e-12;

fn is_finite(p: &Point) -> bool {
    p.iter().all(|c| c.is_finite())
}

/// One cell of a discretized wall: center, outward normal, and area
/// (a length in 2-D worlds, an area in 3-D ones).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePatch {
    pub center: Point,
    pub normal: Point,
    pub area: f64,
}

/// A planar Lambertian wall with a uniform rectangular discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct Wall {
    origin: Point,
    axes: Vec<Point>,
    extents: Vec<f64>,
    counts: Vec<usize>,
    normal: Point,
}

impl Wall {
    /// Build a wall from its corner `origin`, orthonormal span `axes`
    /// (one for 2-D, two for 3-D), per-axis `extents` in meters, per-axis
    /// patch `counts`, and outward unit `normal`.
    pub fn new(
        origin: Point,
        axes: Vec<Point>,
        extents: Vec<f64>,
        counts: Vec<usize>,
        normal: Point,
    ) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Geometry(format!(
                "wall needs 1 or 2 span axes, got {}",
                axes.len()
            )));
        }
        if axes.len() != extents.len() || axes.len() != counts.len() {
            return Err(Error::Geometry(
                "axes, extents and counts must have matching lengths".into(),
            ));
        }
        if !is_finite(&origin) || !is_finite(&normal) || axes.iter().any(|a| !is_finite(a)) {
            return Err(Error::Geometry("wall coordinates must be finite".into()));
        }
        if (normal.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Geometry("wall normal must be unit length".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            if (a.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::Geometry(format!("span axis {i} must be unit length")));
            }
            if a.dot(&normal).abs() > UNIT_TOL {
                return Err(Error::Geometry(format!(
                    "span axis {i} must be orthogonal to the normal"
                )));
            }
        }
        if axes.len() == 2 && axes[0].dot(&axes[1]).abs() > UNIT_TOL {
            return Err(Error::Geometry("span axes must be mutually orthogonal".into()));
        }
        if extents.iter().any(|&e| e <= 0.0 || !e.is_finite()) {
            return Err(Error::Geometry("wall extents must be positive".into()));
        }
        if counts.contains(&0) {
            return Err(Error::Geometry("patch counts must be at least 1".into()));
        }
        Ok(Wall {
            origin,
            axes,
            extents,
            counts,
            normal,
        })
    }

    /// Axis-aligned wall for a 2-D world: spans `u` from `u0` over `width`
    /// at depth `w`, normal pointing along `normal_w` (+1 or -1).
    pub fn span_2d(u0: f64, width: f64, w: f64, count: usize, normal_w: f64) -> Result<Self> {
        Wall::new(
            pt2(u0, w),
            vec![Vector3::new(1.0, 0.0, 0.0)],
            vec![width],
            vec![count],
            Vector3::new(0.0, 0.0, normal_w.signum()),
        )
    }

    /// Axis-aligned wall for a 3-D world spanning `u` and `v` at depth `w`.
    pub fn span_3d(
        origin_uv: (f64, f64),
        extents: (f64, f64),
        w: f64,
        counts: (usize, usize),
        normal_w: f64,
    ) -> Result<Self> {
        Wall::new(
            pt3(origin_uv.0, origin_uv.1, w),
            vec![Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0)],
            vec![extents.0, extents.1],
            vec![counts.0, counts.1],
            Vector3::new(0.0, 0.0, normal_w.signum()),
        )
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn axes(&self) -> &[Point] {
        &self.axes
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn normal(&self) -> Point {
        self.normal
    }

    /// Total number of patches.
    pub fn patch_count(&self) -> usize {
        self.counts.iter().product()
    }

    /// Area of a single cell.
    pub fn patch_area(&self) -> f64 {
        self.extents
            .iter()
            .zip(&self.counts)
            .map(|(e, &c)| e / c as f64)
            .product()
    }

    /// Total wall area (length in 2-D).
    pub fn area(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Wall with the same geometry but `factor` times as many cells per axis.
    pub fn refined(&self, factor: usize) -> Wall {
        let mut w = self.clone();
        for c in &mut w.counts {
            *c *= factor.max(1);
        }
        w
    }

    /// Wall with the same geometry and a different per-axis cell count.
    pub fn with_counts(&self, count: usize) -> Result<Wall> {
        Wall::new(
            self.origin,
            self.axes.clone(),
            self.extents.clone(),
            vec![count; self.axes.len()],
            self.normal,
        )
    }

    /// Midpoint discretization, ordered lexicographically by axis index
    /// (the first axis varies slowest).
    pub fn patches(&self) -> Vec<SurfacePatch> {
        let area = self.patch_area();
        let steps: Vec<f64> = self
            .extents
            .iter()
            .zip(&self.counts)
            .map(|(e, &c)| e / c as f64)
            .collect();
        let mut out = Vec::with_capacity(self.patch_count());
        match self.axes.len() {
            1 => {
                for i in 0..self.counts[0] {
                    let center = self.origin + self.axes[0] * ((i as f64 + 0.5) * steps[0]);
                    out.push(SurfacePatch {
                        center,
                        normal: self.normal,
                        area,
                    });
                }
            }
            _ => {
                for i in 0..self.counts[0] {
                    for j in 0..self.counts[1] {
                        let center = self.origin
                            + self.axes[0] * ((i as f64 + 0.5) * steps[0])
                            + self.axes[1] * ((j as f64 + 0.5) * steps[1]);
                        out.push(SurfacePatch {
                            center,
                            normal: self.normal,
                            area,
                        });
                    }
                }
            }
        }
        out
    }

    /// Signed depth of the wall plane along `+w`, assuming an axis-aligned
    /// wall (the only kind the constructors produce).
    pub fn depth(&self) -> f64 {
        self.origin.z
    }
}

/// Occupied region on a flat occluder plane, in transverse coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PlanarShape {
    /// `u` interval (2-D worlds).
    Interval { lo: f64, hi: f64 },
    /// Axis-aligned rectangle in `(u, v)`.
    Rect { u: (f64, f64), v: (f64, f64) },
    /// Disc in `(u, v)`.
    Disc { center: (f64, f64), radius: f64 },
}

impl PlanarShape {
    /// Strict-interior membership (boundary points count as unoccupied).
    pub fn contains(&self, u: f64, v: f64) -> bool {
        match *self {
            PlanarShape::Interval { lo, hi } => lo < u && u < hi,
            PlanarShape::Rect { u: (u0, u1), v: (v0, v1) } => u0 < u && u < u1 && v0 < v && v < v1,
            PlanarShape::Disc { center, radius } => {
                let du = u - center.0;
                let dv = v - center.1;
                du * du + dv * dv < radius * radius
            }
        }
    }

    /// Unsigned distance from `(u, v)` to the shape boundary.
    pub fn boundary_distance(&self, u: f64, v: f64) -> f64 {
        match *self {
            PlanarShape::Interval { lo, hi } => (u - lo).abs().min((u - hi).abs()),
            PlanarShape::Rect { u: (u0, u1), v: (v0, v1) } => {
                let cx = 0.5 * (u0 + u1);
                let cy = 0.5 * (v0 + v1);
                let hx = 0.5 * (u1 - u0);
                let hy = 0.5 * (v1 - v0);
                let qx = (u - cx).abs() - hx;
                let qy = (v - cy).abs() - hy;
                let outside = (qx.max(0.0).powi(2) + qy.max(0.0).powi(2)).sqrt();
                let inside = qx.max(qy).min(0.0);
                (outside + inside).abs()
            }
            PlanarShape::Disc { center, radius } => {
                let du = u - center.0;
                let dv = v - center.1;
                ((du * du + dv * dv).sqrt() - radius).abs()
            }
        }
    }

    fn measure(&self) -> f64 {
        match *self {
            PlanarShape::Interval { lo, hi } => (hi - lo).max(0.0),
            PlanarShape::Rect { u: (u0, u1), v: (v0, v1) } => {
                (u1 - u0).max(0.0) * (v1 - v0).max(0.0)
            }
            PlanarShape::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    fn shifted(&self, du: f64) -> PlanarShape {
        match *self {
            PlanarShape::Interval { lo, hi } => PlanarShape::Interval { lo: lo + du, hi: hi + du },
            PlanarShape::Rect { u: (u0, u1), v } => {
                PlanarShape::Rect { u: (u0 + du, u1 + du), v }
            }
            PlanarShape::Disc { center, radius } => PlanarShape::Disc {
                center: (center.0 + du, center.1),
                radius,
            },
        }
    }
}

/// Fully absorbing occluder confined to the plane `w = height`, described
/// by an occupancy map: a transverse point is opaque iff it lies strictly
/// inside one of the `shapes`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatOccluder {
    height: f64,
    shapes: Vec<PlanarShape>,
}

impl FlatOccluder {
    pub fn new(height: f64, shapes: Vec<PlanarShape>) -> Result<Self> {
        if height.is_nan() || height <= 0.0 || !height.is_finite() {
            return Err(Error::Geometry("flat occluder plane must sit at height > 0".into()));
        }
        if shapes.is_empty() || shapes.iter().all(|s| s.measure() <= 0.0) {
            return Err(Error::Geometry(
                "flat occluder needs an occupied set of positive measure".into(),
            ));
        }
        Ok(FlatOccluder { height, shapes })
    }

    /// A single occluded `u` interval at plane height `h` (2-D worlds).
    pub fn band(h: f64, lo: f64, hi: f64) -> Result<Self> {
        FlatOccluder::new(h, vec![PlanarShape::Interval { lo, hi }])
    }

    /// A single occluded disc at plane height `h` (3-D worlds).
    pub fn disc(h: f64, center: (f64, f64), radius: f64) -> Result<Self> {
        FlatOccluder::new(h, vec![PlanarShape::Disc { center, radius }])
    }

    /// Distance of the occluder plane from the illumination wall.
    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn shapes(&self) -> &[PlanarShape] {
        &self.shapes
    }

    /// Plane fraction `alpha = H / D` for wall separation `d`.
    pub fn alpha(&self, d: f64) -> f64 {
        self.height / d
    }

    /// True iff the transverse point lies strictly inside the occupied set.
    pub fn occupied(&self, u: f64, v: f64) -> bool {
        self.shapes.iter().any(|s| s.contains(u, v))
    }

    /// Occupancy function `s`: 1 where light passes, 0 on the occluder.
    pub fn occupancy(&self, u: f64, v: f64) -> f64 {
        if self.occupied(u, v) {
            0.0
        } else {
            1.0
        }
    }

    /// Distance from a transverse point to the nearest occupied-set boundary.
    pub fn boundary_distance(&self, u: f64, v: f64) -> f64 {
        self.shapes
            .iter()
            .map(|s| s.boundary_distance(u, v))
            .fold(f64::INFINITY, f64::min)
    }

    /// The same occluder displaced by `du` transversely and `dh` in depth,
    /// for modeling-mismatch studies.
    pub fn displaced(&self, du: f64, dh: f64) -> Result<FlatOccluder> {
        FlatOccluder::new(
            self.height + dh,
            self.shapes.iter().map(|s| s.shifted(du)).collect(),
        )
    }

    /// Realize the occupancy map as explicit absorbing primitives, for
    /// cross-checking the closed-form visibility against ray intersection.
    pub fn to_general(&self, dim: Dim) -> GeneralOccluder {
        let primitives = self
            .shapes
            .iter()
            .map(|s| match (dim, s) {
                (Dim::Two, PlanarShape::Interval { lo, hi }) => Primitive::Segment {
                    a: pt2(*lo, self.height),
                    b: pt2(*hi, self.height),
                },
                (_, PlanarShape::Rect { u, v }) => Primitive::Rect {
                    depth: self.height,
                    u: *u,
                    v: *v,
                },
                (_, PlanarShape::Disc { center, radius }) => Primitive::Disc {
                    center: pt3(center.0, center.1, self.height),
                    normal: Vector3::new(0.0, 0.0, 1.0),
                    radius: *radius,
                },
                (Dim::Three, PlanarShape::Interval { lo, hi }) => Primitive::Rect {
                    depth: self.height,
                    u: (*lo, *hi),
                    v: (f64::NEG_INFINITY, f64::INFINITY),
                },
            })
            .collect();
        GeneralOccluder { primitives }
    }
}

/// An absorbing primitive for generic ray-intersection visibility.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    /// Line segment in the `(u, w)` plane (2-D worlds).
    Segment { a: Point, b: Point },
    /// Wall-parallel axis-aligned rectangle at a fixed depth.
    Rect { depth: f64, u: (f64, f64), v: (f64, f64) },
    /// Planar disc with arbitrary unit normal.
    Disc { center: Point, normal: Point, radius: f64 },
}

impl Primitive {
    fn min_depth(&self) -> f64 {
        match self {
            Primitive::Segment { a, b } => a.z.min(b.z),
            Primitive::Rect { depth, .. } => *depth,
            Primitive::Disc { center, normal, radius } => {
                // Extreme depth reached by the rim.
                let tilt = (1.0 - normal.z * normal.z).max(0.0).sqrt();
                center.z - radius * tilt
            }
        }
    }

    fn max_depth(&self) -> f64 {
        match self {
            Primitive::Segment { a, b } => a.z.max(b.z),
            Primitive::Rect { depth, .. } => *depth,
            Primitive::Disc { center, normal, radius } => {
                let tilt = (1.0 - normal.z * normal.z).max(0.0).sqrt();
                center.z + radius * tilt
            }
        }
    }

    /// Strict-interior intersection of the open segment `(a, b)` with the
    /// primitive. Tangential or endpoint contact does not block.
    pub fn blocks(&self, a: &Point, b: &Point) -> bool {
        match self {
            Primitive::Segment { a: p, b: q } => {
                // Proper crossing test in the (u, w) plane.
                let cross =
                    |o: (f64, f64), s: (f64, f64), t: (f64, f64)| -> f64 {
                        (s.0 - o.0) * (t.1 - o.1) - (s.1 - o.1) * (t.0 - o.0)
                    };
                let a2 = (a.x, a.z);
                let b2 = (b.x, b.z);
                let p2 = (p.x, p.z);
                let q2 = (q.x, q.z);
                let d1 = cross(a2, b2, p2);
                let d2 = cross(a2, b2, q2);
                let d3 = cross(p2, q2, a2);
                let d4 = cross(p2, q2, b2);
                d1 * d2 < 0.0 && d3 * d4 < 0.0
            }
            Primitive::Rect { depth, u, v } => {
                let dw = b.z - a.z;
                if dw == 0.0 {
                    return false;
                }
                let t = (depth - a.z) / dw;
                if !(t > 0.0 && t < 1.0) {
                    return false;
                }
                let pu = a.x + t * (b.x - a.x);
                let pv = a.y + t * (b.y - a.y);
                u.0 < pu && pu < u.1 && v.0 < pv && pv < v.1
            }
            Primitive::Disc { center, normal, radius } => {
                let dir = b - a;
                let denom = dir.dot(normal);
                if denom == 0.0 {
                    return false;
                }
                let t = (center - a).dot(normal) / denom;
                if !(t > 0.0 && t < 1.0) {
                    return false;
                }
                let p = a + dir * t;
                (p - center).norm_squared() < radius * radius
            }
        }
    }
}

/// A bag of absorbing primitives with no special structure.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralOccluder {
    primitives: Vec<Primitive>,
}

impl GeneralOccluder {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::Geometry("general occluder needs at least one primitive".into()));
        }
        Ok(GeneralOccluder { primitives })
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    fn min_depth(&self) -> f64 {
        self.primitives
            .iter()
            .map(Primitive::min_depth)
            .fold(f64::INFINITY, f64::min)
    }

    fn max_depth(&self) -> f64 {
        self.primitives
            .iter()
            .map(Primitive::max_depth)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// True iff the open segment `(a, b)` passes through any primitive of `occ`.
pub fn segment_blocked(a: &Point, b: &Point, occ: &GeneralOccluder) -> bool {
    occ.primitives.iter().any(|p| p.blocks(a, b))
}

/// One occluder of either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Occluder {
    Flat(FlatOccluder),
    General(GeneralOccluder),
}

impl Occluder {
    /// Per-occluder visibility factor `V_i(a, b)`, true when unblocked.
    pub fn passes(&self, a: &Point, b: &Point) -> bool {
        match self {
            Occluder::Flat(f) => {
                let dw = b.z - a.z;
                if dw == 0.0 {
                    return true;
                }
                let t = (f.height - a.z) / dw;
                if !(t > 0.0 && t < 1.0) {
                    return true;
                }
                let u = a.x + t * (b.x - a.x);
                let v = a.y + t * (b.y - a.y);
                !f.occupied(u, v)
            }
            Occluder::General(g) => !segment_blocked(a, b, g),
        }
    }

    fn depth_range(&self) -> (f64, f64) {
        match self {
            Occluder::Flat(f) => (f.height, f.height),
            Occluder::General(g) => (g.min_depth(), g.max_depth()),
        }
    }
}

/// Overall binary visibility: the product of per-occluder factors.
pub fn visible(x: &Point, z: &Point, occluders: &[Occluder]) -> bool {
    occluders.iter().all(|o| o.passes(x, z))
}

/// Visibility as a 0/1 weight, convenient for operator assembly.
pub fn visibility(x: &Point, z: &Point, occluders: &[Occluder]) -> f64 {
    if visible(x, z, occluders) {
        1.0
    } else {
        0.0
    }
}

/// Closed-form visibility for a flat occluder between parallel walls a
/// distance `d` apart: the sight line from `z` (illumination wall) to `x`
/// (hidden wall) meets the occluder plane at the convex combination
/// `alpha * x + (1 - alpha) * z` of transverse coordinates, with
/// `alpha = H / d`.
pub fn flat_visibility(x: &Point, z: &Point, occ: &FlatOccluder, d: f64) -> f64 {
    let alpha = occ.height / d;
    let u = alpha * x.x + (1.0 - alpha) * z.x;
    let v = alpha * x.y + (1.0 - alpha) * z.y;
    occ.occupancy(u, v)
}

/// Binary visibility matrix over measurement pairs (rows) and hidden-wall
/// patches (columns): entry `(k, n)` is `V(x_n, l_k) * V(x_n, c_k)`.
pub fn visibility_matrix(
    pairs: &[(Point, Point)],
    patches: &[SurfacePatch],
    occluders: &[Occluder],
) -> DMatrix<f64> {
    DMatrix::from_fn(pairs.len(), patches.len(), |k, n| {
        let (l, c) = &pairs[k];
        let x = &patches[n].center;
        visibility(x, l, occluders) * visibility(x, c, occluders)
    })
}

/// A room: two parallel walls a distance `D` apart with absorbing
/// occluders in between.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    dim: Dim,
    illumination_wall: Wall,
    hidden_wall: Wall,
    separation: f64,
    occluders: Vec<Occluder>,
}

impl Scene {
    pub fn new(
        dim: Dim,
        illumination_wall: Wall,
        hidden_wall: Wall,
        occluders: Vec<Occluder>,
    ) -> Result<Self> {
        for (wall, name) in [(&illumination_wall, "illumination"), (&hidden_wall, "hidden")] {
            if wall.axes().len() != dim.transverse_axes() {
                return Err(Error::Geometry(format!(
                    "{name} wall has {} span axes but the scene is {}-dimensional",
                    wall.axes().len(),
                    dim.transverse_axes() + 1
                )));
            }
        }
        let n_i = illumination_wall.normal();
        let n_h = hidden_wall.normal();
        if (n_i.cross(&n_h)).norm() > UNIT_TOL {
            return Err(Error::Geometry("walls must be parallel".into()));
        }
        let separation = (hidden_wall.origin() - illumination_wall.origin()).dot(&n_i).abs();
        if separation.is_nan() || separation <= 0.0 {
            return Err(Error::Geometry("wall separation must be positive".into()));
        }
        for occ in &occluders {
            let (lo, hi) = occ.depth_range();
            if !(lo > 0.0 && hi < separation) {
                return Err(Error::Geometry(format!(
                    "occluder depth range [{lo}, {hi}] must lie strictly between the walls (0, {separation})"
                )));
            }
            if dim == Dim::Three {
                if let Occluder::General(g) = occ {
                    if g.primitives().iter().any(|p| matches!(p, Primitive::Segment { .. })) {
                        return Err(Error::Geometry(
                            "segment primitives are zero-measure blockers in a 3-D world; use rects or discs"
                                .into(),
                        ));
                    }
                }
            }
        }
        Ok(Scene {
            dim,
            illumination_wall,
            hidden_wall,
            separation,
            occluders,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn illumination_wall(&self) -> &Wall {
        &self.illumination_wall
    }

    pub fn hidden_wall(&self) -> &Wall {
        &self.hidden_wall
    }

    /// Wall separation `D` in meters.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn occluders(&self) -> &[Occluder] {
        &self.occluders
    }

    pub fn hidden_patches(&self) -> Vec<SurfacePatch> {
        self.hidden_wall.patches()
    }

    pub fn illumination_patches(&self) -> Vec<SurfacePatch> {
        self.illumination_wall.patches()
    }

    /// The same room with every occluder removed.
    pub fn without_occluders(&self) -> Scene {
        Scene {
            occluders: Vec::new(),
            ..self.clone()
        }
    }

    /// The same room with a different set of occluders.
    pub fn with_occluders(&self, occluders: Vec<Occluder>) -> Result<Scene> {
        Scene::new(
            self.dim,
            self.illumination_wall.clone(),
            self.hidden_wall.clone(),
            occluders,
        )
    }

    /// The same room with the hidden wall moved to depth `d` (used by the
    /// unknown-distance search).
    pub fn with_separation(&self, d: f64) -> Result<Scene> {
        let old = &self.hidden_wall;
        let mut origin = old.origin();
        origin.z = self.illumination_wall.origin().z + d;
        let hidden = Wall::new(
            origin,
            old.axes().to_vec(),
            old.extents().to_vec(),
            old.counts().to_vec(),
            old.normal(),
        )?;
        Scene::new(self.dim, self.illumination_wall.clone(), hidden, self.occluders.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::rng::rng_from_seed;

    #[test]
    fn single_cell_wall_discretization() {
        let wall = Wall::span_2d(0.0, 1.0, 2.0, 1, -1.0).unwrap();
        let patches = wall.patches();
        assert_eq!(patches.len(), 1);
        assert_eq!(patches[0].center, pt2(0.5, 2.0));
        assert_eq!(patches[0].area, 1.0);
    }

    #[test]
    fn uniform_midpoint_grid() {
        let wall = Wall::span_2d(0.0, 1.0, 0.0, 100, 1.0).unwrap();
        let patches = wall.patches();
        assert_eq!(patches.len(), 100);
        for (i, p) in patches.iter().enumerate() {
            let expect = 0.005 + 0.01 * i as f64;
            assert!((p.center.x - expect).abs() < 1e-12);
            assert!((p.area - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_3d_partitions_area() {
        let wall = Wall::span_3d((0.0, 0.0), (1.0, 1.0), 1.0, (4, 4), -1.0).unwrap();
        let patches = wall.patches();
        assert_eq!(patches.len(), 16);
        for p in &patches {
            assert!((p.area - 0.0625).abs() < 1e-15);
        }
        let total: f64 = patches.iter().map(|p| p.area).sum();
        assert!((total - wall.area()).abs() / wall.area() < 1e-9);
    }

    #[test]
    fn patch_order_is_lexicographic() {
        let wall = Wall::span_3d((0.0, 0.0), (1.0, 2.0), 1.0, (2, 3), -1.0).unwrap();
        let patches = wall.patches();
        // axis 0 varies slowest
        assert!(patches[0].center.x < patches[3].center.x);
        assert!(patches[0].center.y < patches[1].center.y);
    }

    #[test]
    fn segment_blocked_perpendicular_crossing() {
        let occ = GeneralOccluder::new(vec![Primitive::Segment {
            a: pt2(-1.0, 1.0),
            b: pt2(1.0, 1.0),
        }])
        .unwrap();
        assert!(segment_blocked(&pt2(0.0, 0.0), &pt2(0.0, 2.0), &occ));
    }

    #[test]
    fn segment_blocked_disjoint() {
        let occ = GeneralOccluder::new(vec![Primitive::Segment {
            a: pt2(1.0, 1.0),
            b: pt2(2.0, 1.0),
        }])
        .unwrap();
        assert!(!segment_blocked(&pt2(0.0, 0.0), &pt2(0.0, 2.0), &occ));
    }

    /// Independent ray-disc oracle: substitute the segment parametrization
    /// into the plane equation, then compare squared radial distance.
    fn ray_disc_oracle(a: &Point, b: &Point, center: &Point, normal: &Point, radius: f64) -> bool {
        let d = b - a;
        let denom = d.x * normal.x + d.y * normal.y + d.z * normal.z;
        if denom == 0.0 {
            return false;
        }
        let t = ((center.x - a.x) * normal.x
            + (center.y - a.y) * normal.y
            + (center.z - a.z) * normal.z)
            / denom;
        if t <= 0.0 || t >= 1.0 {
            return false;
        }
        let px = a.x + t * d.x - center.x;
        let py = a.y + t * d.y - center.y;
        let pz = a.z + t * d.z - center.z;
        px * px + py * py + pz * pz < radius * radius
    }

    #[test]
    fn random_segments_agree_with_ray_disc_oracle() {
        let mut rng = rng_from_seed(42);
        for _ in 0..1000 {
            let normal = {
                let v = Vector3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                );
                v / v.norm()
            };
            let center = pt3(
                rng.random::<f64>(),
                rng.random::<f64>(),
                0.2 + 0.6 * rng.random::<f64>(),
            );
            let radius = 0.05 + 0.4 * rng.random::<f64>();
            let prim = Primitive::Disc { center, normal, radius };
            let a = pt3(rng.random::<f64>() * 2.0 - 0.5, rng.random::<f64>() * 2.0 - 0.5, 0.0);
            let b = pt3(rng.random::<f64>() * 2.0 - 0.5, rng.random::<f64>() * 2.0 - 0.5, 1.0);
            assert_eq!(
                prim.blocks(&a, &b),
                ray_disc_oracle(&a, &b, &center, &normal, radius)
            );
        }
    }

    #[test]
    fn no_occluders_means_visible() {
        assert!(visible(&pt2(0.3, 2.0), &pt2(0.9, 0.0), &[]));
        assert_eq!(visibility(&pt2(0.3, 2.0), &pt2(0.9, 0.0), &[]), 1.0);
    }

    #[test]
    fn one_blocking_occluder_dominates_the_product() {
        let blocking = Occluder::Flat(FlatOccluder::band(1.0, 0.0, 1.0).unwrap());
        let idle = Occluder::Flat(FlatOccluder::band(1.5, 10.0, 11.0).unwrap());
        let x = pt2(0.5, 2.0);
        let z = pt2(0.5, 0.0);
        assert_eq!(visibility(&x, &z, std::slice::from_ref(&blocking)), 0.0);
        assert_eq!(visibility(&x, &z, &[idle, blocking]), 0.0);
    }

    #[test]
    fn product_form_matches_union_geometry_oracle() {
        // Two flat occluders checked one by one must agree with a single
        // ray test against the union of their primitives.
        let f1 = FlatOccluder::band(0.7, 0.35, 0.65).unwrap();
        let f2 = FlatOccluder::band(1.3, 0.6, 0.8).unwrap();
        let union = GeneralOccluder::new(
            f1.to_general(Dim::Two)
                .primitives()
                .iter()
                .chain(f2.to_general(Dim::Two).primitives())
                .cloned()
                .collect(),
        )
        .unwrap();
        let occs = [Occluder::Flat(f1), Occluder::Flat(f2)];
        let mut rng = rng_from_seed(11);
        for _ in 0..10_000 {
            let x = pt2(rng.random::<f64>(), 2.0);
            let z = pt2(rng.random::<f64>(), 0.0);
            assert_eq!(visible(&x, &z, &occs), !segment_blocked(&x, &z, &union));
        }
    }

    #[test]
    fn flat_visibility_convex_combination() {
        let occ = FlatOccluder::band(1.0, 0.4, 0.6).unwrap();
        // alpha = 0.5: combination of 0.2 and 0.8 is 0.5, inside the band.
        assert_eq!(flat_visibility(&pt2(0.2, 2.0), &pt2(0.8, 0.0), &occ, 2.0), 0.0);
        assert_eq!(flat_visibility(&pt2(0.9, 2.0), &pt2(0.9, 0.0), &occ, 2.0), 1.0);
    }

    #[test]
    fn flat_matches_ray_test_away_from_boundaries() {
        let occ = FlatOccluder::band(0.8, 0.3, 0.55).unwrap();
        let d = 2.0;
        let general = occ.to_general(Dim::Two);
        let alpha = occ.alpha(d);
        let cell = 0.01;
        let n = 101;
        for i in 0..n {
            for j in 0..n {
                let x = pt2(i as f64 / (n - 1) as f64, d);
                let z = pt2(j as f64 / (n - 1) as f64, 0.0);
                let u = alpha * x.x + (1.0 - alpha) * z.x;
                if occ.boundary_distance(u, 0.0) <= cell {
                    continue;
                }
                let closed = flat_visibility(&x, &z, &occ, d) == 1.0;
                let ray = !segment_blocked(&x, &z, &general);
                assert_eq!(closed, ray, "x={} z={}", x.x, z.x);
            }
        }
    }

    #[test]
    fn visibility_matrix_all_ones_without_occluders() {
        let wall = Wall::span_2d(0.0, 1.0, 2.0, 10, -1.0).unwrap();
        let pairs = vec![(pt2(0.1, 0.0), pt2(0.9, 0.0)), (pt2(0.5, 0.0), pt2(0.5, 0.0))];
        let m = visibility_matrix(&pairs, &wall.patches(), &[]);
        assert!(m.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn coincident_pair_rows_form_shifting_band() {
        // With l = c the blocked set in x translates linearly as l moves,
        // so consecutive rows carry shifted zero runs (a convolution-like
        // band), up to edge effects.
        let hidden = Wall::span_2d(0.0, 1.0, 2.0, 100, -1.0).unwrap();
        let occ = Occluder::Flat(FlatOccluder::band(1.0, 0.4, 0.6).unwrap());
        let grid: Vec<Point> = (0..20).map(|i| pt2(0.2 + 0.03 * i as f64, 0.0)).collect();
        let pairs: Vec<(Point, Point)> = grid.iter().map(|l| (*l, *l)).collect();
        let m = visibility_matrix(&pairs, &hidden.patches(), &[occ]);
        let first_zero = |row: usize| -> Option<usize> {
            (0..m.ncols()).find(|&jj| m[(row, jj)] == 0.0)
        };
        let mut offsets = Vec::new();
        for k in 1..pairs.len() {
            if let (Some(a), Some(b)) = (first_zero(k - 1), first_zero(k)) {
                offsets.push(b as isize - a as isize);
            }
        }
        assert!(!offsets.is_empty());
        // alpha = 0.5: moving l by +0.03 m shifts the band start by
        // -(1 - alpha)/alpha * 0.03 = -0.03 m = -3 cells.
        for &o in &offsets {
            assert_eq!(o, -3);
        }
    }

    #[test]
    fn removing_an_occluder_never_hurts_visibility() {
        let f1 = Occluder::Flat(FlatOccluder::band(0.5, 0.1, 0.45).unwrap());
        let f2 = Occluder::Flat(FlatOccluder::band(1.1, 0.5, 0.75).unwrap());
        let both = [f1.clone(), f2.clone()];
        let only: [Occluder; 1] = [f1];
        let mut rng = rng_from_seed(5);
        for _ in 0..2000 {
            let x = pt2(rng.random::<f64>(), 2.0);
            let z = pt2(rng.random::<f64>(), 0.0);
            assert!(visibility(&x, &z, &only) >= visibility(&x, &z, &both));
        }
    }

    #[test]
    fn grazing_contact_does_not_block() {
        // Segment passing exactly through the interval endpoint.
        let occ = FlatOccluder::band(1.0, 0.4, 0.6).unwrap();
        let x = pt2(0.4, 2.0);
        let z = pt2(0.4, 0.0);
        assert_eq!(flat_visibility(&x, &z, &occ, 2.0), 1.0);
        assert!(!segment_blocked(&x, &z, &occ.to_general(Dim::Two)));
    }

    #[test]
    fn scene_validation() {
        let illum = Wall::span_2d(0.0, 1.0, 0.0, 10, 1.0).unwrap();
        let hidden = Wall::span_2d(0.0, 1.0, 2.0, 10, -1.0).unwrap();
        let scene = Scene::new(Dim::Two, illum.clone(), hidden.clone(), vec![]).unwrap();
        assert_eq!(scene.separation(), 2.0);

        // Occluder outside the room is rejected.
        let bad = Occluder::Flat(FlatOccluder::band(2.5, 0.0, 1.0).unwrap());
        assert!(Scene::new(Dim::Two, illum, hidden, vec![bad]).is_err());
    }

    #[test]
    fn segments_rejected_in_three_d_scenes() {
        let illum = Wall::span_3d((0.0, 0.0), (1.0, 1.0), 0.0, (4, 4), 1.0).unwrap();
        let hidden = Wall::span_3d((0.0, 0.0), (1.0, 1.0), 2.0, (4, 4), -1.0).unwrap();
        let seg = Occluder::General(
            GeneralOccluder::new(vec![Primitive::Segment { a: pt2(0.2, 1.0), b: pt2(0.8, 1.0) }])
                .unwrap(),
        );
        assert!(Scene::new(Dim::Three, illum, hidden, vec![seg]).is_err());
    }

    #[test]
    fn moved_hidden_wall_changes_separation() {
        let illum = Wall::span_2d(0.0, 1.0, 0.0, 10, 1.0).unwrap();
        let hidden = Wall::span_2d(0.0, 1.0, 2.0, 10, -1.0).unwrap();
        let scene = Scene::new(Dim::Two, illum, hidden, vec![]).unwrap();
        let moved = scene.with_separation(3.5).unwrap();
        assert_eq!(moved.separation(), 3.5);
        assert_eq!(moved.hidden_patches()[0].center.z, 3.5);
    }
}
