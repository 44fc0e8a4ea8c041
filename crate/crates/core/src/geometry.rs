//! Region descriptions and their quadrature discretizations.
//!
//! Every region is defined in a canonical local frame and placed in space by a
//! [`Pose`]. Sampling uses the midpoint rule on uniform parametric grids, so
//! all weights are positive and sum to the analytic measure.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Fewest samples any region is discretized with.
pub const MIN_SAMPLES: usize = 4;

const FRAME_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);
    pub const X: Vec3 = Vec3([1.0, 0.0, 0.0]);
    pub const Y: Vec3 = Vec3([0.0, 1.0, 0.0]);
    pub const Z: Vec3 = Vec3([0.0, 0.0, 1.0]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub const fn xy(x: f64, y: f64) -> Self {
        Vec3([x, y, 0.0])
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.0[0]
    }
    #[inline]
    pub fn y(self) -> f64 {
        self.0[1]
    }
    #[inline]
    pub fn z(self) -> f64 {
        self.0[2]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        let [a, b, c] = self.0;
        let [d, e, f] = o.0;
        Vec3([b * f - c * e, c * d - a * f, a * e - b * d])
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

/// A proper rotation, stored row-major and acting as `R · v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rodrigues rotation about `axis` (need not be normalized).
    pub fn about_axis(axis: Vec3, angle: f64) -> Self {
        let k = axis.normalized();
        let (s, c) = angle.sin_cos();
        let [x, y, z] = k.0;
        let t = 1.0 - c;
        Rotation([
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }
}

/// Placement of a region: `frame[i]` is the image of local axis `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub origin: Vec3,
    pub frame: [Vec3; 3],
}

impl Default for Pose {
    fn default() -> Self {
        Pose::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose { origin: Vec3::ZERO, frame: [Vec3::X, Vec3::Y, Vec3::Z] };

    /// Checked constructor; the frame must be right-handed orthonormal.
    pub fn new(origin: Vec3, frame: [Vec3; 3]) -> Result<Self> {
        let pose = Pose { origin, frame };
        pose.check()?;
        Ok(pose)
    }

    /// In-plane placement: translate to `(x, y)` and rotate by `angle` about z.
    pub fn planar(x: f64, y: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Pose { origin: Vec3::xy(x, y), frame: [Vec3::xy(c, s), Vec3::xy(-s, c), Vec3::Z] }
    }

    pub fn translation(origin: Vec3) -> Self {
        Pose { origin, ..Pose::IDENTITY }
    }

    fn check(&self) -> Result<()> {
        if !self.origin.is_finite() || self.frame.iter().any(|f| !f.is_finite()) {
            return Err(invalid("pose contains non-finite values"));
        }
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (self.frame[i].dot(self.frame[j]) - expect).abs() > FRAME_TOL {
                    return Err(invalid("orientation frame is not orthonormal"));
                }
            }
        }
        if self.frame[0].cross(self.frame[1]).dot(self.frame[2]) < 0.0 {
            return Err(invalid("orientation frame is left-handed"));
        }
        Ok(())
    }

    #[inline]
    pub fn point(&self, local: Vec3) -> Vec3 {
        self.origin + self.direction(local)
    }

    #[inline]
    pub fn direction(&self, local: Vec3) -> Vec3 {
        self.frame[0] * local.0[0] + self.frame[1] * local.0[1] + self.frame[2] * local.0[2]
    }

    /// The pose after applying the rigid motion `p ↦ R·p + t` to the placed region.
    pub fn moved(&self, rotation: &Rotation, translation: Vec3) -> Pose {
        Pose {
            origin: rotation.apply(self.origin) + translation,
            frame: self.frame.map(|f| rotation.apply(f)),
        }
    }
}

/// Parametric shape in its local frame. Lengths in meters, angles in radians.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Segment along local x, centred at the origin, normal +y.
    Segment2d { length: f64 },
    /// Same as [`Shape::Segment2d`] but placed in 3D space.
    Segment3d { length: f64 },
    /// Circular arc about the local origin, centred on +y, spanning `span`
    /// radians. A span of 2π gives a closed circle. Normals point outward.
    Arc2d { radius: f64, span: f64 },
    /// Open or closed (first vertex repeated last) polyline in the local plane.
    Polyline2d { vertices: Vec<[f64; 2]> },
    /// Disc in the local xy-plane, normal +z.
    Disc3d { radius: f64 },
    /// Rectangle `width × height` in the local xy-plane, centred, normal +z.
    Rectangle3d { width: f64, height: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Segment2d,
    Segment3d,
    Arc2d,
    Polyline2d,
    Disc3d,
    Rectangle3d,
}

impl RegionKind {
    pub fn ambient_dim(self) -> usize {
        match self {
            RegionKind::Segment2d | RegionKind::Arc2d | RegionKind::Polyline2d => 2,
            RegionKind::Segment3d | RegionKind::Disc3d | RegionKind::Rectangle3d => 3,
        }
    }

    /// Parametric dimension: 1 for curves, 2 for surfaces.
    pub fn manifold_dim(self) -> usize {
        match self {
            RegionKind::Disc3d | RegionKind::Rectangle3d => 2,
            _ => 1,
        }
    }
}

impl Shape {
    pub fn kind(&self) -> RegionKind {
        match self {
            Shape::Segment2d { .. } => RegionKind::Segment2d,
            Shape::Segment3d { .. } => RegionKind::Segment3d,
            Shape::Arc2d { .. } => RegionKind::Arc2d,
            Shape::Polyline2d { .. } => RegionKind::Polyline2d,
            Shape::Disc3d { .. } => RegionKind::Disc3d,
            Shape::Rectangle3d { .. } => RegionKind::Rectangle3d,
        }
    }
}

/// A transmitter or receiver region: a shape plus its placement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionSpecRepr", into = "RegionSpecRepr")]
pub struct RegionSpec {
    shape: Shape,
    pose: Pose,
}

impl RegionSpec {
    pub fn new(shape: Shape, pose: Pose) -> Result<Self> {
        let spec = RegionSpec { shape, pose };
        spec.validate()?;
        Ok(spec)
    }

    pub fn segment2d(length: f64, pose: Pose) -> Result<Self> {
        Self::new(Shape::Segment2d { length }, pose)
    }

    pub fn segment3d(length: f64, pose: Pose) -> Result<Self> {
        Self::new(Shape::Segment3d { length }, pose)
    }

    pub fn arc2d(radius: f64, span: f64, pose: Pose) -> Result<Self> {
        Self::new(Shape::Arc2d { radius, span }, pose)
    }

    pub fn polyline2d(vertices: Vec<[f64; 2]>, pose: Pose) -> Result<Self> {
        Self::new(Shape::Polyline2d { vertices }, pose)
    }

    pub fn disc3d(radius: f64, pose: Pose) -> Result<Self> {
        Self::new(Shape::Disc3d { radius }, pose)
    }

    pub fn rectangle3d(width: f64, height: f64, pose: Pose) -> Result<Self> {
        Self::new(Shape::Rectangle3d { width, height }, pose)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn kind(&self) -> RegionKind {
        self.shape.kind()
    }

    pub fn ambient_dim(&self) -> usize {
        self.kind().ambient_dim()
    }

    /// Same shape at a new placement.
    pub fn with_pose(&self, pose: Pose) -> Result<Self> {
        Self::new(self.shape.clone(), pose)
    }

    pub fn moved(&self, rotation: &Rotation, translation: Vec3) -> Result<Self> {
        self.with_pose(self.pose.moved(rotation, translation))
    }

    /// Unit normal of a planar region (surfaces and straight segments).
    pub fn plane_normal(&self) -> Option<Vec3> {
        match self.shape {
            Shape::Disc3d { .. } | Shape::Rectangle3d { .. } => Some(self.pose.frame[2]),
            Shape::Segment2d { .. } | Shape::Segment3d { .. } => Some(self.pose.frame[1]),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pose.check()?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match &self.shape {
            Shape::Segment2d { length } | Shape::Segment3d { length } => positive("length", *length)?,
            Shape::Arc2d { radius, span } => {
                positive("radius", *radius)?;
                positive("span", *span)?;
                if *span > 2.0 * PI * (1.0 + 1e-12) {
                    return Err(invalid(format!("arc span {span} exceeds 2π")));
                }
            }
            Shape::Polyline2d { vertices } => {
                if vertices.len() < 2 {
                    return Err(invalid("polyline needs at least two vertices"));
                }
                if vertices.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid("polyline vertices must be finite"));
                }
                for w in vertices.windows(2) {
                    if w[0] == w[1] {
                        return Err(invalid("consecutive polyline vertices must be distinct"));
                    }
                }
                let closed = vertices.len() > 2 && vertices.first() == vertices.last();
                let distinct = if closed { &vertices[..vertices.len() - 1] } else { &vertices[..] };
                for (i, a) in distinct.iter().enumerate() {
                    if distinct[i + 1..].contains(a) {
                        return Err(invalid("polyline vertices must be distinct"));
                    }
                }
            }
            Shape::Disc3d { radius } => positive("radius", *radius)?,
            Shape::Rectangle3d { width, height } => {
                positive("width", *width)?;
                positive("height", *height)?;
            }
        }
        if self.ambient_dim() == 2 {
            let in_plane = self.pose.origin.z().abs() <= FRAME_TOL
                && self.pose.frame[0].z().abs() <= FRAME_TOL
                && self.pose.frame[1].z().abs() <= FRAME_TOL;
            if !in_plane {
                return Err(invalid("2D regions must be posed within the xy-plane"));
            }
        }
        Ok(())
    }

    /// Analytic length (curves, m) or area (surfaces, m²).
    pub fn measure(&self) -> f64 {
        match &self.shape {
            Shape::Segment2d { length } | Shape::Segment3d { length } => *length,
            Shape::Arc2d { radius, span } => radius * span,
            Shape::Polyline2d { vertices } => polyline_lengths(vertices).iter().sum(),
            Shape::Disc3d { radius } => PI * radius * radius,
            Shape::Rectangle3d { width, height } => width * height,
        }
    }

    /// Whether the curve closes on itself (full circle or closed polyline).
    pub fn is_closed(&self) -> bool {
        match &self.shape {
            Shape::Arc2d { span, .. } => *span >= 2.0 * PI * (1.0 - 1e-12),
            Shape::Polyline2d { vertices } => vertices.len() > 2 && vertices.first() == vertices.last(),
            _ => false,
        }
    }

    /// Largest extent of the region, used to size quadrature grids.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Segment2d { length } | Shape::Segment3d { length } => *length,
            Shape::Arc2d { radius, span } => {
                if *span >= PI {
                    2.0 * radius
                } else {
                    2.0 * radius * (span / 2.0).sin()
                }
            }
            Shape::Polyline2d { vertices } => {
                let mut best: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        best = best.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
                    }
                }
                best
            }
            Shape::Disc3d { radius } => 2.0 * radius,
            Shape::Rectangle3d { width, height } => width.hypot(*height),
        }
    }
}

fn polyline_lengths(vertices: &[[f64; 2]]) -> Vec<f64> {
    vertices.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).collect()
}

fn check_sampling(wavelength: f64, points_per_wavelength: f64) -> Result<()> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    if !(points_per_wavelength.is_finite() && points_per_wavelength >= 2.0) {
        return Err(invalid(format!(
            "points per wavelength must be at least 2, got {points_per_wavelength}"
        )));
    }
    Ok(())
}

fn intervals(extent: f64, step: f64) -> usize {
    // Guard against 1e-16 overshoot turning an exact fit into an extra interval.
    let n = (extent / step * (1.0 - 1e-12)).ceil();
    if n.is_finite() && n < 1e12 {
        (n as usize).max(1)
    } else {
        usize::MAX
    }
}

/// Number of samples [`sample_region`] would produce, without allocating.
pub fn estimate_samples(spec: &RegionSpec, wavelength: f64, points_per_wavelength: f64) -> Result<usize> {
    check_sampling(wavelength, points_per_wavelength)?;
    let step = wavelength / points_per_wavelength;
    Ok(match &spec.shape {
        Shape::Segment2d { length } | Shape::Segment3d { length } => intervals(*length, step).max(MIN_SAMPLES),
        Shape::Arc2d { radius, span } => intervals(radius * span, step).max(MIN_SAMPLES),
        Shape::Polyline2d { vertices } => {
            let lengths = polyline_lengths(vertices);
            let step = step.min(lengths.iter().sum::<f64>() / MIN_SAMPLES as f64);
            lengths.iter().fold(0usize, |acc, l| acc.saturating_add(intervals(*l, step)))
        }
        Shape::Disc3d { radius } => {
            let rings = intervals(*radius, step);
            if rings > 1_000_000 {
                return Ok(usize::MAX);
            }
            (0..rings).map(ring_count).sum()
        }
        Shape::Rectangle3d { width, height } => {
            intervals(*width, step).max(2).saturating_mul(intervals(*height, step).max(2))
        }
    })
}

fn ring_count(k: usize) -> usize {
    // Ring k has mid-radius (k + 1/2)·h; azimuthal spacing must not exceed h.
    ((2.0 * PI * (k as f64 + 0.5)) * (1.0 - 1e-12)).ceil() as usize
}

/// Edge vectors of the quadrature cell around a sample. `dv` is zero for
/// curves. The cell spans `point ± du/2 ± dv/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub du: Vec3,
    pub dv: Vec3,
}

impl Cell {
    pub fn size(&self) -> f64 {
        self.du.norm().max(self.dv.norm())
    }
}

/// Closed convex outline of a region, used to decide self-occlusion.
#[derive(Clone, Debug, PartialEq)]
pub enum Enclosure {
    Circle { center: Vec3, radius: f64 },
    /// Counter-clockwise or clockwise convex polygon in the xy-plane.
    ConvexPolygon { vertices: Vec<Vec3> },
    /// Closed but not convex; visibility is not decidable locally.
    NonConvex,
}

impl Enclosure {
    /// Whether `p` lies strictly inside the closed outline.
    pub fn contains(&self, p: Vec3) -> Option<bool> {
        match self {
            Enclosure::Circle { center, radius } => Some((p - *center).norm() < *radius * (1.0 - 1e-12)),
            Enclosure::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut sign = 0.0;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = (b - a).cross(p - a).z();
                    if c.abs() <= 1e-14 * (b - a).norm_sq().max(1e-300) {
                        return Some(false);
                    }
                    if sign == 0.0 {
                        sign = c.signum();
                    } else if c.signum() != sign {
                        return Some(false);
                    }
                }
                Some(true)
            }
            Enclosure::NonConvex => None,
        }
    }
}

/// Quadrature discretization of a region.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledRegion {
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
    weights: Vec<f64>,
    cells: Vec<Cell>,
    measure: f64,
    kind: RegionKind,
    enclosure: Option<Enclosure>,
}

impl SampledRegion {
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }
    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
    pub fn measure(&self) -> f64 {
        self.measure
    }
    pub fn kind(&self) -> RegionKind {
        self.kind
    }
    pub fn ambient_dim(&self) -> usize {
        self.kind.ambient_dim()
    }
    pub fn manifold_dim(&self) -> usize {
        self.kind.manifold_dim()
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn enclosure(&self) -> Option<&Enclosure> {
        self.enclosure.as_ref()
    }

    /// Weighted centroid of the samples.
    pub fn centroid(&self) -> Vec3 {
        let mut acc = Vec3::ZERO;
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc += *p * *w;
        }
        acc * (1.0 / self.weights.iter().sum::<f64>())
    }

    /// Largest cell edge, i.e. the effective sample spacing.
    pub fn max_spacing(&self) -> f64 {
        self.cells.iter().map(Cell::size).fold(0.0, f64::max)
    }

    /// Concatenate regions of the same kind class into one sampled region.
    /// The union loses any enclosure information.
    pub fn union(parts: &[SampledRegion]) -> Result<SampledRegion> {
        let first = parts.first().ok_or_else(|| invalid("union of zero regions"))?;
        let mut out = SampledRegion {
            points: Vec::new(),
            normals: Vec::new(),
            weights: Vec::new(),
            cells: Vec::new(),
            measure: 0.0,
            kind: first.kind,
            enclosure: None,
        };
        for p in parts {
            if p.ambient_dim() != first.ambient_dim() || p.manifold_dim() != first.manifold_dim() {
                return Err(invalid("cannot join regions of different dimensionality"));
            }
            out.points.extend_from_slice(&p.points);
            out.normals.extend_from_slice(&p.normals);
            out.weights.extend_from_slice(&p.weights);
            out.cells.extend_from_slice(&p.cells);
            out.measure += p.measure;
        }
        if parts.len() == 1 {
            out.enclosure = first.enclosure.clone();
        }
        Ok(out)
    }

    /// Subdivide every cell into `n` (curves) or `n²` (surfaces) sub-samples.
    pub(crate) fn subdivide_cell(&self, i: usize, n: usize, out: &mut Vec<(Vec3, f64)>) {
        let c = self.cells[i];
        let p = self.points[i];
        out.clear();
        if self.manifold_dim() == 1 {
            let w = self.weights[i] / n as f64;
            for a in 0..n {
                let s = (a as f64 + 0.5) / n as f64 - 0.5;
                out.push((p + c.du * s, w));
            }
        } else {
            let w = self.weights[i] / (n * n) as f64;
            for a in 0..n {
                let s = (a as f64 + 0.5) / n as f64 - 0.5;
                for b in 0..n {
                    let t = (b as f64 + 0.5) / n as f64 - 0.5;
                    out.push((p + c.du * s + c.dv * t, w));
                }
            }
        }
    }

    fn push(&mut self, point: Vec3, normal: Vec3, weight: f64, cell: Cell) {
        self.points.push(point);
        self.normals.push(normal);
        self.weights.push(weight);
        self.cells.push(cell);
    }
}

/// Discretize `spec` with at least `points_per_wavelength` samples per
/// wavelength along every parametric direction.
pub fn sample_region(spec: &RegionSpec, wavelength: f64, points_per_wavelength: f64) -> Result<SampledRegion> {
    check_sampling(wavelength, points_per_wavelength)?;
    spec.validate()?;
    let step = wavelength / points_per_wavelength;
    let estimated = estimate_samples(spec, wavelength, points_per_wavelength)?;
    if estimated > 200_000_000 {
        return Err(Error::TooLarge { estimated, cap: 200_000_000 });
    }
    let pose = &spec.pose;
    let mut out = SampledRegion {
        points: Vec::with_capacity(estimated),
        normals: Vec::with_capacity(estimated),
        weights: Vec::with_capacity(estimated),
        cells: Vec::with_capacity(estimated),
        measure: spec.measure(),
        kind: spec.kind(),
        enclosure: None,
    };
    match &spec.shape {
        Shape::Segment2d { length } | Shape::Segment3d { length } => {
            let n = intervals(*length, step).max(MIN_SAMPLES);
            let h = length / n as f64;
            let normal = pose.direction(Vec3::Y);
            let du = pose.direction(Vec3::X) * h;
            for i in 0..n {
                let x = -length / 2.0 + (i as f64 + 0.5) * h;
                out.push(pose.point(Vec3::xy(x, 0.0)), normal, h, Cell { du, dv: Vec3::ZERO });
            }
        }
        Shape::Arc2d { radius, span } => {
            let n = intervals(radius * span, step).max(MIN_SAMPLES);
            let dphi = span / n as f64;
            let w = radius * dphi;
            for i in 0..n {
                let phi = -span / 2.0 + (i as f64 + 0.5) * dphi;
                let (s, c) = phi.sin_cos();
                let radial = Vec3::xy(s, c);
                let tangent = Vec3::xy(c, -s);
                out.push(
                    pose.point(radial * *radius),
                    pose.direction(radial),
                    w,
                    Cell { du: pose.direction(tangent) * w, dv: Vec3::ZERO },
                );
            }
            if spec.is_closed() {
                out.enclosure = Some(Enclosure::Circle { center: pose.origin, radius: *radius });
            }
        }
        Shape::Polyline2d { vertices } => {
            let lengths = polyline_lengths(vertices);
            let step = step.min(lengths.iter().sum::<f64>() / MIN_SAMPLES as f64);
            for (w, len) in vertices.windows(2).zip(&lengths) {
                let n = intervals(*len, step);
                let h = len / n as f64;
                let t = Vec3::xy((w[1][0] - w[0][0]) / len, (w[1][1] - w[0][1]) / len);
                let normal = pose.direction(Vec3::xy(-t.y(), t.x()));
                let du = pose.direction(t) * h;
                let start = Vec3::xy(w[0][0], w[0][1]);
                for i in 0..n {
                    let local = start + t * ((i as f64 + 0.5) * h);
                    out.push(pose.point(local), normal, h, Cell { du, dv: Vec3::ZERO });
                }
            }
            if spec.is_closed() {
                let ring: Vec<Vec3> =
                    vertices[..vertices.len() - 1].iter().map(|v| pose.point(Vec3::xy(v[0], v[1]))).collect();
                out.enclosure = Some(if is_convex(&ring) {
                    Enclosure::ConvexPolygon { vertices: ring }
                } else {
                    Enclosure::NonConvex
                });
            }
        }
        Shape::Disc3d { radius } => {
            let rings = intervals(*radius, step);
            let h = radius / rings as f64;
            let normal = pose.direction(Vec3::Z);
            for k in 0..rings {
                let rho = (k as f64 + 0.5) * h;
                let m = ring_count(k);
                let dphi = 2.0 * PI / m as f64;
                let w = PI * h * h * (2 * k + 1) as f64 / m as f64;
                for j in 0..m {
                    let phi = (j as f64 + 0.5) * dphi;
                    let (s, c) = phi.sin_cos();
                    let radial = Vec3::xy(c, s);
                    let tangent = Vec3::xy(-s, c);
                    out.push(
                        pose.point(radial * rho),
                        normal,
                        w,
                        Cell { du: pose.direction(radial) * h, dv: pose.direction(tangent) * (rho * dphi) },
                    );
                }
            }
        }
        Shape::Rectangle3d { width, height } => {
            let nx = intervals(*width, step).max(2);
            let ny = intervals(*height, step).max(2);
            let (hx, hy) = (width / nx as f64, height / ny as f64);
            let normal = pose.direction(Vec3::Z);
            let du = pose.direction(Vec3::X) * hx;
            let dv = pose.direction(Vec3::Y) * hy;
            for i in 0..nx {
                let x = -width / 2.0 + (i as f64 + 0.5) * hx;
                for j in 0..ny {
                    let y = -height / 2.0 + (j as f64 + 0.5) * hy;
                    out.push(pose.point(Vec3::xy(x, y)), normal, hx * hy, Cell { du, dv });
                }
            }
        }
    }
    Ok(out)
}

fn is_convex(ring: &[Vec3]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let c = ring[(i + 2) % n];
        let z = (b - a).cross(c - b).z();
        if z.abs() < 1e-15 {
            continue;
        }
        if sign == 0.0 {
            sign = z.signum();
        } else if z.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

/// Analytic length or area of a region.
pub fn region_measure(spec: &RegionSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.measure())
}

// --- serde representation -------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSpecRepr {
    kind: RegionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    /// Arc span in degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    span_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height: Option<f64>,
    #[serde(default)]
    origin: Vec<f64>,
    /// Rotation about the global z-axis, degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle_deg: Option<f64>,
    /// Rows are the local x, y, z axes expressed in global coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<[[f64; 3]; 3]>,
}

impl TryFrom<RegionSpecRepr> for RegionSpec {
    type Error = Error;

    fn try_from(r: RegionSpecRepr) -> Result<Self> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| invalid(format!("region kind `{}` requires `{name}`", kind_name(r.kind))))
        };
        let shape = match r.kind {
            RegionKind::Segment2d => Shape::Segment2d { length: need("length", r.length)? },
            RegionKind::Segment3d => Shape::Segment3d { length: need("length", r.length)? },
            RegionKind::Arc2d => Shape::Arc2d {
                radius: need("radius", r.radius)?,
                span: need("span_deg", r.span_deg)?.to_radians(),
            },
            RegionKind::Polyline2d => Shape::Polyline2d {
                vertices: r.vertices.clone().ok_or_else(|| invalid("region kind `polyline2d` requires `vertices`"))?,
            },
            RegionKind::Disc3d => Shape::Disc3d { radius: need("radius", r.radius)? },
            RegionKind::Rectangle3d => Shape::Rectangle3d {
                width: need("width", r.width)?,
                height: need("height", r.height)?,
            },
        };
        let origin = match r.origin.as_slice() {
            [] => Vec3::ZERO,
            [x, y] => Vec3::xy(*x, *y),
            [x, y, z] => Vec3::new(*x, *y, *z),
            other => return Err(invalid(format!("origin must have 2 or 3 components, got {}", other.len()))),
        };
        let pose = match (r.frame, r.angle_deg) {
            (Some(_), Some(_)) => return Err(invalid("give either `frame` or `angle_deg`, not both")),
            (Some(f), None) => Pose::new(origin, f.map(Vec3))?,
            (None, angle) => {
                let mut p = Pose::planar(0.0, 0.0, angle.unwrap_or(0.0).to_radians());
                p.origin = origin;
                p
            }
        };
        RegionSpec::new(shape, pose)
    }
}

impl From<RegionSpec> for RegionSpecRepr {
    fn from(s: RegionSpec) -> Self {
        let mut r = RegionSpecRepr {
            kind: s.kind(),
            length: None,
            radius: None,
            span_deg: None,
            vertices: None,
            width: None,
            height: None,
            origin: if s.ambient_dim() == 2 {
                vec![s.pose.origin.x(), s.pose.origin.y()]
            } else {
                s.pose.origin.0.to_vec()
            },
            angle_deg: None,
            frame: Some(s.pose.frame.map(|f| f.0)),
        };
        match s.shape {
            Shape::Segment2d { length } | Shape::Segment3d { length } => r.length = Some(length),
            Shape::Arc2d { radius, span } => {
                r.radius = Some(radius);
                r.span_deg = Some(span.to_degrees());
            }
            Shape::Polyline2d { vertices } => r.vertices = Some(vertices),
            Shape::Disc3d { radius } => r.radius = Some(radius),
            Shape::Rectangle3d { width, height } => {
                r.width = Some(width);
                r.height = Some(height);
            }
        }
        r
    }
}

fn kind_name(kind: RegionKind) -> &'static str {
    match kind {
        RegionKind::Segment2d => "segment2d",
        RegionKind::Segment3d => "segment3d",
        RegionKind::Arc2d => "arc2d",
        RegionKind::Polyline2d => "polyline2d",
        RegionKind::Disc3d => "disc3d",
        RegionKind::Rectangle3d => "rectangle3d",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn segment_weights_sum_to_length() {
        let spec = RegionSpec::segment2d(1.0, Pose::IDENTITY).unwrap();
        let s = sample_region(&spec, 0.1, 5.0).unwrap();
        assert!(s.len() >= 50);
        assert!(rel(s.weights().iter().sum(), 1.0) < 1e-10);
    }

    #[test]
    fn disc_weights_sum_to_area() {
        for (a, lambda) in [(1.0, 0.1), (3.0, 0.77), (0.2, 5.0)] {
            let spec = RegionSpec::disc3d(a, Pose::IDENTITY).unwrap();
            let s = sample_region(&spec, lambda, 5.0).unwrap();
            assert!(rel(s.weights().iter().sum(), PI * a * a) < 1e-6);
            assert!(s.len() >= MIN_SAMPLES);
        }
    }

    #[test]
    fn arc_samples_are_radial_with_arc_length_weights() {
        let (rho, span) = (2.5, 1.3);
        let center = Vec3::xy(0.7, -0.4);
        let spec = RegionSpec::arc2d(rho, span, Pose::planar(center.x(), center.y(), 0.3)).unwrap();
        let s = sample_region(&spec, 0.05, 5.0).unwrap();
        assert!(rel(s.weights().iter().sum(), rho * span) < 1e-10);
        for (p, n) in s.points().iter().zip(s.normals()) {
            let radial = *p - center;
            assert!((radial.norm() - rho).abs() < 1e-12);
            let expected = radial * (1.0 / rho);
            assert!((*n - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_measures() {
        let r = RegionSpec::rectangle3d(2.0, 3.0, Pose::IDENTITY).unwrap();
        assert_eq!(region_measure(&r).unwrap(), 6.0);
        let d = RegionSpec::disc3d(1.0, Pose::IDENTITY).unwrap();
        assert!((region_measure(&d).unwrap() - PI).abs() < 1e-15);
        let p = RegionSpec::polyline2d(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], Pose::IDENTITY).unwrap();
        assert_eq!(region_measure(&p).unwrap(), 2.0);
    }

    #[test]
    fn spacing_bound_holds() {
        let lambda = 0.1;
        let specs = [
            RegionSpec::segment3d(1.3, Pose::IDENTITY).unwrap(),
            RegionSpec::arc2d(1.0, 2.0, Pose::IDENTITY).unwrap(),
            RegionSpec::disc3d(0.9, Pose::IDENTITY).unwrap(),
            RegionSpec::rectangle3d(0.7, 1.1, Pose::IDENTITY).unwrap(),
            RegionSpec::polyline2d(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.35]], Pose::IDENTITY).unwrap(),
        ];
        for spec in &specs {
            let s = sample_region(spec, lambda, 5.0).unwrap();
            assert!(s.max_spacing() <= lambda / 5.0 * (1.0 + 1e-12), "{:?}", spec.kind());
            assert_eq!(s.len(), estimate_samples(spec, lambda, 5.0).unwrap());
        }
    }

    #[test]
    fn minimum_sample_count_at_low_frequency() {
        let spec = RegionSpec::segment2d(0.01, Pose::IDENTITY).unwrap();
        assert_eq!(sample_region(&spec, 10.0, 5.0).unwrap().len(), MIN_SAMPLES);
        let spec = RegionSpec::disc3d(0.01, Pose::IDENTITY).unwrap();
        assert!(sample_region(&spec, 10.0, 5.0).unwrap().len() >= MIN_SAMPLES);
        let spec = RegionSpec::polyline2d(vec![[0.0, 0.0], [0.01, 0.0]], Pose::IDENTITY).unwrap();
        assert!(sample_region(&spec, 10.0, 5.0).unwrap().len() >= MIN_SAMPLES);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(RegionSpec::segment2d(0.0, Pose::IDENTITY).is_err());
        assert!(RegionSpec::disc3d(-1.0, Pose::IDENTITY).is_err());
        assert!(RegionSpec::arc2d(1.0, 7.0, Pose::IDENTITY).is_err());
        assert!(RegionSpec::polyline2d(vec![[0.0, 0.0], [0.0, 0.0]], Pose::IDENTITY).is_err());
        let skew = Pose { origin: Vec3::ZERO, frame: [Vec3::X, Vec3::new(0.1, 1.0, 0.0), Vec3::Z] };
        assert!(RegionSpec::disc3d(1.0, skew).is_err());
        let tilted = Pose::new(Vec3::ZERO, [Vec3::X, Vec3::Z, -Vec3::Y]).unwrap();
        assert!(RegionSpec::segment2d(1.0, tilted).is_err());
        let spec = RegionSpec::segment2d(1.0, Pose::IDENTITY).unwrap();
        assert!(matches!(sample_region(&spec, 0.0, 5.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_region(&spec, 0.1, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn parses_config_representation() {
        let spec: RegionSpec =
            serde_json::from_str(r#"{"kind":"arc2d","radius":2,"span_deg":90,"origin":[1,2],"angle_deg":30}"#).unwrap();
        assert_eq!(spec.kind(), RegionKind::Arc2d);
        assert!((spec.measure() - PI).abs() < 1e-12);
        let back: RegionSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back.kind(), spec.kind());
        assert!((back.pose().origin - spec.pose().origin).norm() < 1e-15);
        assert!(serde_json::from_str::<RegionSpec>(r#"{"kind":"disc3d"}"#).is_err());
        assert!(serde_json::from_str::<RegionSpec>(r#"{"kind":"disc3d","radius":1,"colour":2}"#).is_err());
    }

    #[test]
    fn convex_enclosures() {
        let sq = RegionSpec::polyline2d(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
            Pose::IDENTITY,
        )
        .unwrap();
        let s = sample_region(&sq, 0.1, 5.0).unwrap();
        let e = s.enclosure().unwrap();
        assert_eq!(e.contains(Vec3::xy(0.5, 0.5)), Some(true));
        assert_eq!(e.contains(Vec3::xy(1.5, 0.5)), Some(false));
        let l = RegionSpec::polyline2d(
            vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0], [0.0, 0.0]],
            Pose::IDENTITY,
        )
        .unwrap();
        assert_eq!(sample_region(&l, 0.1, 5.0).unwrap().enclosure(), Some(&Enclosure::NonConvex));
    }
}
