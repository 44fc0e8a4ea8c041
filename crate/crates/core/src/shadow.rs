//! Geometry-based NDoF estimates from mutual shadow (view) measures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::SampledRegion;
use crate::pairs::{check_disjoint, pair_sums, PairOptions};

/// How a shadow measure was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowMethod {
    Quadrature,
    AnalyticTwoDiscs,
    Paraxial,
    EnclosedConvex,
}

/// Optional additive low-frequency correction of `N_a`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowFreqCorrection {
    #[default]
    None,
    /// `+1`, for planar and curve pairs.
    Planar,
    /// `+6`, for sources enclosed by a sphere.
    Sphere,
    Custom(f64),
}

impl LowFreqCorrection {
    pub fn offset(self) -> f64 {
        match self {
            LowFreqCorrection::None => 0.0,
            LowFreqCorrection::Planar => 1.0,
            LowFreqCorrection::Sphere => 6.0,
            LowFreqCorrection::Custom(c) => c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShadowResult {
    /// `A_TR` in m² or `L_TR` in m.
    pub measure: f64,
    pub n_a: f64,
    pub low_freq_offset: f64,
    pub method: ShadowMethod,
}

impl ShadowResult {
    pub fn new(measure: f64, wavelength: f64, dim: usize, method: ShadowMethod, corr: LowFreqCorrection) -> Result<Self> {
        Ok(ShadowResult {
            measure,
            n_a: shadow_ndof(measure, wavelength, dim, corr)?,
            low_freq_offset: corr.offset(),
            method,
        })
    }
}

fn shadow_integral(t: &SampledRegion, r: &SampledRegion, p: i32) -> Result<f64> {
    check_disjoint(t, r)?;
    let [s] = pair_sums(t, r, PairOptions::SHADOW, |pair| {
        [if pair.visible { pair.obliquity() / pair.dist.powi(p) } else { 0.0 }]
    })?;
    Ok(s)
}

/// `A_TR = ∫∫ |n̂′·R||n̂·R|/|R|⁴ dS′dS` between two surfaces in 3D.
pub fn shadow_area(t: &SampledRegion, r: &SampledRegion) -> Result<f64> {
    for s in [t, r] {
        if s.ambient_dim() != 3 || s.manifold_dim() != 2 {
            return Err(invalid(format!("shadow area needs surfaces in 3D, got {:?}", s.kind())));
        }
    }
    shadow_integral(t, r, 2)
}

/// `L_TR = ∫∫ |n̂′·R||n̂·R|/|R|³ dl′dl` between two curves.
///
/// Curves placed in 3D use their stored in-plane normals, which is only
/// meaningful when both curves lie in a common plane.
pub fn shadow_length(t: &SampledRegion, r: &SampledRegion) -> Result<f64> {
    for s in [t, r] {
        if s.manifold_dim() != 1 {
            return Err(invalid(format!("shadow length needs curves, got {:?}", s.kind())));
        }
    }
    if t.ambient_dim() != r.ambient_dim() {
        return Err(invalid("shadow length needs both curves in the same space"));
    }
    shadow_integral(t, r, 1)
}

/// Shadow measure appropriate for the pair: area for 3D surfaces, length
/// for curves.
pub fn shadow_measure(t: &SampledRegion, r: &SampledRegion) -> Result<f64> {
    match (t.ambient_dim(), t.manifold_dim(), r.ambient_dim(), r.manifold_dim()) {
        (3, 2, 3, 2) => shadow_area(t, r),
        (2, 1, 2, 1) | (3, 1, 3, 1) => shadow_length(t, r),
        _ => Err(Error::UnsupportedConfiguration(format!(
            "no shadow measure for {:?} and {:?}",
            t.kind(),
            r.kind()
        ))),
    }
}

/// Closed form for coaxial parallel discs of radii `a`, `r` at distance `d`:
/// `(π²/2)(Δ − √(Δ² − 4a²r²))`, `Δ = a² + r² + d²`.
pub fn shadow_two_discs(a: f64, r: f64, d: f64) -> f64 {
    let delta = a * a + r * r + d * d;
    let root = (delta * delta - 4.0 * a * a * r * r).max(0.0).sqrt();
    // Rationalized to avoid cancellation for large d.
    PI * PI * 2.0 * a * a * r * r / (delta + root)
}

/// Paraxial shadow area `d⁻² ∫|n̂·R̂|dS ∫|n̂·R̂|dS`, with `R̂` the direction
/// between the region centroids.
pub fn paraxial_area(t: &SampledRegion, r: &SampledRegion, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(format!("distance must be positive, got {d}")));
    }
    let axis = r.centroid() - t.centroid();
    if !(axis.norm() > 0.0) {
        return Err(invalid("regions share a centroid; no propagation direction"));
    }
    let axis = axis.normalized();
    let projected =
        |s: &SampledRegion| -> f64 { s.normals().iter().zip(s.weights()).map(|(n, w)| w * n.dot(axis).abs()).sum() };
    Ok(projected(t) * projected(r) / (d * d))
}

/// Shadow measure of a convex region surrounded by the receiver: `πA` for a
/// surface of area `A`, `2L` for a curve of length `L`.
pub fn enclosed_convex(measure: f64, dim: usize) -> Result<f64> {
    match dim {
        2 => Ok(2.0 * measure),
        3 => Ok(PI * measure),
        _ => Err(invalid(format!("dimension must be 2 or 3, got {dim}"))),
    }
}

/// `N_a = L_TR/λ` (2D) or `A_TR/λ²` (3D), plus an optional offset.
pub fn shadow_ndof(measure: f64, wavelength: f64, dim: usize, corr: LowFreqCorrection) -> Result<f64> {
    if !(measure >= 0.0 && measure.is_finite()) {
        return Err(invalid(format!("shadow measure must be non-negative, got {measure}")));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    let base = match dim {
        2 => measure / wavelength,
        3 => measure / (wavelength * wavelength),
        _ => return Err(invalid(format!("dimension must be 2 or 3, got {dim}"))),
    };
    Ok(base + corr.offset())
}
