//! Double sums over transmitter/receiver sample pairs.
//!
//! All geometric double integrals (coupling strength, shadow measures,
//! average channel strength) go through [`pair_sums`], which adds local cell
//! refinement for the closest pairs and the visibility bookkeeping.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Enclosure, SampledRegion, Vec3};

/// Geometry of one (sub-)sample pair. `rvec` points from transmitter to receiver.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Pair {
    pub rvec: Vec3,
    pub dist: f64,
    pub n_t: Vec3,
    pub n_r: Vec3,
    pub visible: bool,
}

impl Pair {
    /// `|n̂_T·R̂| |n̂_R·R̂|`.
    #[inline]
    pub fn obliquity(&self) -> f64 {
        let inv = 1.0 / self.dist;
        (self.n_t.dot(self.rvec) * inv).abs() * (self.n_r.dot(self.rvec) * inv).abs()
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PairOptions {
    /// Fraction of pairs (by distance) eligible for refinement.
    pub refine_fraction: f64,
    /// Subdivisions per cell edge for refined pairs.
    pub refine_factor: usize,
    /// Reject configurations in which an open region sees both faces of the
    /// other region.
    pub require_visibility: bool,
}

impl PairOptions {
    pub const REFINED: PairOptions = PairOptions { refine_fraction: 0.1, refine_factor: 4, require_visibility: false };
    pub const SHADOW: PairOptions = PairOptions { refine_fraction: 0.1, refine_factor: 4, require_visibility: true };
}

/// Per-region visibility data.
struct Side {
    /// Normals flipped to point outward for closed convex regions.
    normals: Vec<Vec3>,
    /// For closed regions: which samples of the *other* region lie inside.
    other_inside: Option<Vec<bool>>,
}

impl Side {
    fn new(own: &SampledRegion, other: &SampledRegion) -> Result<Side> {
        match own.enclosure() {
            None => Ok(Side { normals: own.normals().to_vec(), other_inside: None }),
            Some(Enclosure::NonConvex) => Err(Error::UnsupportedConfiguration(
                "visibility of non-convex closed regions is not supported".into(),
            )),
            Some(enc) => {
                let center = own.centroid();
                let normals = own
                    .points()
                    .iter()
                    .zip(own.normals())
                    .map(|(p, n)| if n.dot(*p - center) >= 0.0 { *n } else { -*n })
                    .collect();
                let inside = other.points().iter().map(|p| enc.contains(*p).unwrap_or(false)).collect();
                Ok(Side { normals, other_inside: Some(inside) })
            }
        }
    }

    /// Whether sample `i` of this region sees point `q` (sample `j` of the other).
    #[inline]
    fn sees(&self, i: usize, p: Vec3, j: usize, q: Vec3) -> bool {
        match &self.other_inside {
            None => true,
            Some(inside) => inside[j] || self.normals[i].dot(q - p) > 0.0,
        }
    }
}

/// Distance below which pairs are refined: the `fraction` quantile of the
/// pair-distance distribution, estimated on a strided subset of pairs.
fn refinement_threshold(t: &SampledRegion, r: &SampledRegion, fraction: f64) -> f64 {
    if fraction <= 0.0 {
        return 0.0;
    }
    let total = t.len() * r.len();
    let stride = (total / 1_000_000).max(1);
    let mut d: Vec<f64> = (0..total)
        .step_by(stride)
        .map(|k| (r.points()[k % r.len()] - t.points()[k / r.len()]).norm())
        .collect();
    let idx = ((d.len() as f64 * fraction) as usize).min(d.len() - 1);
    let (_, v, _) = d.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
    *v
}

/// Evaluate `K` integrands over all pairs at once: `Σ_{i,j} w_i w_j f(pair)`.
pub(crate) fn pair_sums<const K: usize, F>(
    t: &SampledRegion,
    r: &SampledRegion,
    opts: PairOptions,
    f: F,
) -> Result<[f64; K]>
where
    F: Fn(&Pair) -> [f64; K] + Sync,
{
    let ts = Side::new(t, r)?;
    let rs = Side::new(r, t)?;
    let threshold = refinement_threshold(t, r, opts.refine_fraction);
    let cell_t = t.max_spacing();
    let cell_r = r.max_spacing();
    // Refining far pairs changes nothing; only pairs within a few cells matter.
    let near = 8.0 * cell_t.max(cell_r);
    let factor = opts.refine_factor.max(1);

    let open_t = t.enclosure().is_none();
    let open_r = r.enclosure().is_none();

    let partial = (0..t.len())
        .into_par_iter()
        .map(|i| {
            let p = t.points()[i];
            let wt = t.weights()[i];
            let n_t = ts.normals[i];
            let mut acc = [0.0; K];
            let mut sub_t = Vec::new();
            let mut sub_r = Vec::new();
            let mut t_side = 0u8;
            for j in 0..r.len() {
                let q = r.points()[j];
                let rvec = q - p;
                let dist = rvec.norm();
                let n_r = rs.normals[j];
                let visible = ts.sees(i, p, j, q) && rs.sees(j, q, i, p);
                if opts.require_visibility {
                    let tol = 1e-12 * dist;
                    if open_t {
                        let s = n_t.dot(rvec);
                        if s > tol {
                            t_side |= 1;
                        } else if s < -tol {
                            t_side |= 2;
                        }
                    }
                }
                let w = wt * r.weights()[j];
                if dist < threshold && dist < near && factor > 1 {
                    t.subdivide_cell(i, factor, &mut sub_t);
                    r.subdivide_cell(j, factor, &mut sub_r);
                    for &(pp, wp) in &sub_t {
                        for &(qq, wq) in &sub_r {
                            let rv = qq - pp;
                            let pair = Pair { rvec: rv, dist: rv.norm(), n_t, n_r, visible };
                            let v = f(&pair);
                            for k in 0..K {
                                acc[k] += wp * wq * v[k];
                            }
                        }
                    }
                } else {
                    let v = f(&Pair { rvec, dist, n_t, n_r, visible });
                    for k in 0..K {
                        acc[k] += w * v[k];
                    }
                }
            }
            (acc, t_side)
        })
        .collect::<Vec<_>>();

    let mut total = [0.0; K];
    for (i, (acc, t_side)) in partial.into_iter().enumerate() {
        for k in 0..K {
            total[k] += acc[k];
        }
        if t_side == 3 {
            return Err(Error::NotVisible(format!(
                "transmitter sample {i} sees the receiver on both of its faces"
            )));
        }
    }
    // The receiver side is checked in its own pass so that no per-pair state
    // has to be kept.
    let r_side: Vec<u8> = if opts.require_visibility && open_r {
        (0..r.len())
            .into_par_iter()
            .map(|j| {
                let q = r.points()[j];
                let n_r = rs.normals[j];
                let mut side = 0u8;
                for &p in t.points() {
                    let rvec = q - p;
                    let tol = 1e-12 * rvec.norm();
                    let s = n_r.dot(rvec);
                    if s > tol {
                        side |= 1;
                    } else if s < -tol {
                        side |= 2;
                    }
                }
                side
            })
            .collect()
    } else {
        Vec::new()
    };
    if let Some(j) = r_side.iter().position(|&s| s == 3) {
        return Err(Error::NotVisible(format!("receiver sample {j} sees the transmitter on both of its faces")));
    }
    Ok(total)
}

/// Extremes of `|n̂_T·R̂||n̂_R·R̂|` over visible sample pairs, `(min, max)`.
pub(crate) fn obliquity_extremes(t: &SampledRegion, r: &SampledRegion) -> Result<(f64, f64)> {
    let ts = Side::new(t, r)?;
    let rs = Side::new(r, t)?;
    let (lo, hi) = (0..t.len())
        .into_par_iter()
        .map(|i| {
            let p = t.points()[i];
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for j in 0..r.len() {
                let q = r.points()[j];
                if !(ts.sees(i, p, j, q) && rs.sees(j, q, i, p)) {
                    continue;
                }
                let rvec = q - p;
                let pair = Pair { rvec, dist: rvec.norm(), n_t: ts.normals[i], n_r: rs.normals[j], visible: true };
                let c = pair.obliquity();
                lo = lo.min(c);
                hi = hi.max(c);
            }
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    if !lo.is_finite() {
        return Err(Error::NotVisible("no mutually visible sample pairs".into()));
    }
    Ok((lo, hi))
}

/// Smallest transmitter–receiver sample distance.
pub(crate) fn min_distance(t: &SampledRegion, r: &SampledRegion) -> f64 {
    t.points()
        .par_iter()
        .map(|p| r.points().iter().map(|q| (*q - *p).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Overlap guard shared by the geometric quadratures: relative to the
/// coarser sample spacing.
pub(crate) fn check_disjoint(t: &SampledRegion, r: &SampledRegion) -> Result<()> {
    let guard = 1e-9 * t.max_spacing().max(r.max_spacing());
    let d = min_distance(t, r);
    if d <= guard {
        return Err(Error::RegionsOverlap { min_distance: d, guard });
    }
    Ok(())
}
