//! Spectrum-based NDoF estimators and channel-strength quantities.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::{PairClass, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::geometry::SampledRegion;
use crate::pairs::{check_disjoint, obliquity_extremes, pair_sums, PairOptions};

/// Values below this fraction of `ζ₁` are left out of the corner fit.
pub const CORNER_FLOOR: f64 = 1e-12;

/// Slope difference (in log-log units) below which a corner fit is flagged.
pub const CORNER_CONFIDENCE_SLOPE: f64 = 0.5;

const MIN_CORNER_VALUES: usize = 8;

/// `(Σζ)²/Σζ²`.
pub fn effective_ndof(s: &Spectrum) -> Result<f64> {
    let sum = s.sum();
    if !(sum > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    // Scale by ζ₁ so the squares cannot underflow.
    let top = s.largest();
    let (a, b) = s.values().iter().fold((0.0, 0.0), |(a, b), &v| {
        let x = v / top;
        (a + x, b + x * x)
    });
    Ok(a * a / b)
}

/// Exponential of the Shannon entropy of `ζ/Σζ`.
pub fn effective_rank(s: &Spectrum) -> Result<f64> {
    let sum = s.sum();
    if !(sum > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    let h: f64 = s
        .values()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / sum;
            -p * p.ln()
        })
        .sum();
    Ok(h.exp())
}

/// Result of the two-line fit in `(ln n, ln ζ_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Corner {
    /// Number of values in the first (propagating) segment.
    pub index: usize,
    pub slope_before: f64,
    /// `None` when the split sits at the end of the retained values.
    pub slope_after: Option<f64>,
    pub low_confidence: bool,
}

#[derive(Clone, Copy, Default)]
struct Sums {
    n: f64,
    x: f64,
    y: f64,
    xx: f64,
    xy: f64,
    yy: f64,
}

impl Sums {
    fn minus(&self, o: &Sums) -> Sums {
        Sums { n: self.n - o.n, x: self.x - o.x, y: self.y - o.y, xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }

    /// `(slope, residual sum of squares)` of the least-squares line.
    fn fit(&self) -> (f64, f64) {
        let sxx = self.xx - self.x * self.x / self.n;
        let sxy = self.xy - self.x * self.y / self.n;
        let syy = self.yy - self.y * self.y / self.n;
        if sxx <= 0.0 {
            return (0.0, syy.max(0.0));
        }
        (sxy / sxx, (syy - sxy * sxy / sxx).max(0.0))
    }
}

/// Two-line least-squares corner fit.
///
/// Only values above [`CORNER_FLOOR`]`·ζ₁` enter. Splits `m ∈ [3, M−3]` are
/// searched exhaustively; when values were dropped by the floor, `m = M` is
/// also a candidate (the drop itself is the corner). Ties go to the larger
/// split.
pub fn corner_fit(s: &Spectrum) -> Result<Corner> {
    let top = s.largest();
    let m_total = s.values().iter().take_while(|&&v| v > CORNER_FLOOR * top && v > 0.0).count();
    if m_total < MIN_CORNER_VALUES {
        return Err(Error::InsufficientSpectrum { needed: MIN_CORNER_VALUES, got: m_total });
    }
    let mut prefix = Vec::with_capacity(m_total + 1);
    let mut acc = Sums::default();
    prefix.push(acc);
    for (i, &v) in s.values()[..m_total].iter().enumerate() {
        let x = ((i + 1) as f64).ln();
        let y = v.ln();
        acc = Sums { n: acc.n + 1.0, x: acc.x + x, y: acc.y + y, xx: acc.xx + x * x, xy: acc.xy + x * y, yy: acc.yy + y * y };
        prefix.push(acc);
    }
    let all = prefix[m_total];
    // Residuals come from differences of prefix sums, so ties are judged
    // relative to the raw second moment as well.
    let scale = (all.yy - all.y * all.y / all.n).max(0.0);
    let tol = 1e-10 * scale + 1e-12 * all.yy + 1e-280;

    let mut best: Option<(f64, Corner)> = None;
    let mut consider = |ssr: f64, corner: Corner| match &best {
        Some((b, _)) if ssr > *b + tol => {}
        Some((b, _)) if ssr >= *b - tol => best = Some((b.min(ssr), corner)),
        _ => best = Some((ssr, corner)),
    };
    for m in 3..=(m_total - 3) {
        let (s1, r1) = prefix[m].fit();
        let (s2, r2) = all.minus(&prefix[m]).fit();
        let corner = Corner {
            index: m,
            slope_before: s1,
            slope_after: Some(s2),
            low_confidence: (s1 - s2).abs() < CORNER_CONFIDENCE_SLOPE,
        };
        consider(r1 + r2, corner);
    }
    if s.len() > m_total {
        let (s1, r1) = all.fit();
        consider(r1, Corner { index: m_total, slope_before: s1, slope_after: None, low_confidence: false });
    }
    Ok(best.expect("search range is non-empty").1)
}

/// Corner index of the spectrum, see [`corner_fit`].
pub fn corner_detect(s: &Spectrum) -> Result<usize> {
    corner_fit(s).map(|c| c.index)
}

/// `card{(4π)²ζ_n/λ² ≥ 1/2}` for surface pairs in 3D.
pub fn threshold_ndof(s: &Spectrum) -> Result<usize> {
    if s.class() != PairClass::SurfacePair3d {
        return Err(invalid(format!("threshold count is defined for 3D surface pairs, got {:?}", s.class())));
    }
    let scale = (4.0 * PI / s.wavelength()).powi(2);
    Ok(s.values().iter().take_while(|&&v| scale * v >= 0.5).count())
}

fn check_exponent(p: u32) -> Result<()> {
    if p == 1 || p == 2 {
        Ok(())
    } else {
        Err(invalid(format!("distance exponent must be 1 or 2, got {p}")))
    }
}

/// High-frequency coupling strength `‖H‖²_F`.
///
/// `p = 2`: `Σ w w /((4π)² R²)` (3D kernel). `p = 1`: `Σ w w λ/((4π)² R)`
/// (large-argument 2D kernel). The closest pairs are refined locally.
pub fn coupling_strength_quadrature(t: &SampledRegion, r: &SampledRegion, p: u32, wavelength: f64) -> Result<f64> {
    check_exponent(p)?;
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    check_disjoint(t, r)?;
    let [s] = pair_sums(t, r, PairOptions::REFINED, |pair| [1.0 / pair.dist.powi(p as i32)])?;
    let scale = if p == 2 { 1.0 } else { wavelength };
    Ok(s * scale / (4.0 * PI).powi(2))
}

/// Geometric average channel strength: `∫∫ R^{−p}` over `∫∫ |n̂′·R̂||n̂·R̂| R^{−p}`,
/// the latter restricted to mutually visible pairs.
pub fn average_channel_strength(t: &SampledRegion, r: &SampledRegion, p: u32) -> Result<f64> {
    check_exponent(p)?;
    check_disjoint(t, r)?;
    let [num, den] = pair_sums(t, r, PairOptions::SHADOW, |pair| {
        let k = 1.0 / pair.dist.powi(p as i32);
        [k, if pair.visible { k * pair.obliquity() } else { 0.0 }]
    })?;
    if !(den > 0.0) {
        return Err(Error::NotVisible("regions see each other only at grazing incidence".into()));
    }
    Ok(num / den)
}

/// `(1/max |R̂·n̂_T||R̂·n̂_R|, 1/min |R̂·n̂_T||R̂·n̂_R|)` over sample pairs. The
/// upper bound is infinite when some pair is at grazing incidence.
pub fn eig_level_bounds(t: &SampledRegion, r: &SampledRegion) -> Result<(f64, f64)> {
    check_disjoint(t, r)?;
    let (lo, hi) = obliquity_extremes(t, r)?;
    if !(hi > 0.0) {
        return Err(Error::NotVisible("regions see each other only at grazing incidence".into()));
    }
    let upper = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
    Ok((1.0 / hi, upper))
}

/// Fit `N ≈ α/λ^p` to `(λ, N)` pairs by least squares in log space.
pub fn power_law_fit(series: &[(f64, f64)], p: u32) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::InsufficientData(format!("power-law fit needs at least 3 points, got {}", series.len())));
    }
    let mut acc = 0.0;
    for &(lambda, n) in series {
        if !(lambda > 0.0 && n > 0.0 && lambda.is_finite() && n.is_finite()) {
            return Err(invalid(format!("power-law fit needs positive finite data, got ({lambda}, {n})")));
        }
        acc += n.ln() + p as f64 * lambda.ln();
    }
    Ok((acc / series.len() as f64).exp())
}

/// All estimator outputs for one evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NdofReport {
    pub wavelength: f64,
    pub n_e: f64,
    pub n_r: f64,
    pub n_c: Option<usize>,
    pub n_c_low_confidence: bool,
    /// Only defined for surface pairs in 3D.
    pub n_h: Option<usize>,
    pub n_a: Option<f64>,
    pub ne0: Option<f64>,
    pub coupling_strength: f64,
    /// `(4π)²Σζ/(λ²N_a)`.
    pub avg_level: Option<f64>,
    pub bounds: Option<(f64, f64)>,
}

impl NdofReport {
    /// Fill the purely spectral fields; the geometric ones start empty.
    pub fn from_spectrum(s: &Spectrum) -> Result<Self> {
        let (n_c, low) = match corner_fit(s) {
            Ok(c) => (Some(c.index), c.low_confidence),
            Err(Error::InsufficientSpectrum { .. }) => (None, true),
            Err(e) => return Err(e),
        };
        Ok(NdofReport {
            wavelength: s.wavelength(),
            n_e: effective_ndof(s)?,
            n_r: effective_rank(s)?,
            n_c,
            n_c_low_confidence: low,
            n_h: threshold_ndof(s).ok(),
            n_a: None,
            ne0: None,
            coupling_strength: s.sum(),
            avg_level: None,
            bounds: None,
        })
    }

    /// Record the shadow estimate and derive the average level from it.
    pub fn set_shadow(&mut self, n_a: f64, n_a_plain: f64) {
        self.n_a = Some(n_a);
        if n_a_plain > 0.0 {
            self.avg_level = Some((4.0 * PI / self.wavelength).powi(2) * self.coupling_strength / n_a_plain);
        }
    }
}
