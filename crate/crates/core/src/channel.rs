//! Channel matrices between sampled regions and their eigenspectra.
//!
//! Entries carry the symmetric `√w` quadrature weighting,
//! `H[i][j] = √w_R[i] · G(|r_R[i] − r_T[j]|) · √w_T[j]`, so the squared
//! singular values of `H` approximate the eigenvalues of the continuous
//! correlation operator, physical units included.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::qr::no_pivoting::factor as qr;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::SampledRegion;
use crate::greens::{Kernel, KernelVariant};

/// Relative eigenvalue floor; smaller values are clamped to zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Minimum admissible transmitter–receiver sample distance, in wavelengths.
pub const DEFAULT_OVERLAP_GUARD: f64 = 1e-9;

/// Which kind of region pair a spectrum belongs to. Determines the physical
/// dimension of the eigenvalues and the applicable normalizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// Two surfaces in 3D; eigenvalues in m².
    SurfacePair3d,
    /// Two curves in 2D; eigenvalues in m².
    CurvePair2d,
    /// Two curves in 3D; eigenvalues dimensionless.
    CurvePair3d,
    /// Any other combination.
    Mixed,
}

impl PairClass {
    pub fn of(t: &SampledRegion, r: &SampledRegion) -> Self {
        match (t.ambient_dim(), t.manifold_dim(), r.ambient_dim(), r.manifold_dim()) {
            (3, 2, 3, 2) => PairClass::SurfacePair3d,
            (2, 1, 2, 1) => PairClass::CurvePair2d,
            (3, 1, 3, 1) => PairClass::CurvePair3d,
            _ => PairClass::Mixed,
        }
    }

    /// Whether `(4π)²ζ/λ²` is the dimensionless eigenvalue level.
    pub fn has_area_eigenvalues(self) -> bool {
        matches!(self, PairClass::SurfacePair3d | PairClass::CurvePair2d)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AssemblyOptions {
    /// Overlap guard as a fraction of the wavelength.
    pub overlap_guard: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { overlap_guard: DEFAULT_OVERLAP_GUARD }
    }
}

/// Weighted Green's-function samples, `N_R × N_T`.
#[derive(Clone, Debug)]
pub struct ChannelMatrix {
    entries: Mat<Complex64>,
    wavelength: f64,
    variant: KernelVariant,
    frobenius_sq: f64,
    class: PairClass,
}

impl ChannelMatrix {
    /// Wrap an explicit matrix, e.g. for synthetic checks.
    pub fn from_entries(entries: Mat<Complex64>, wavelength: f64, variant: KernelVariant) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(invalid("wavelength must be positive"));
        }
        let mut frobenius_sq = 0.0;
        for j in 0..entries.ncols() {
            for i in 0..entries.nrows() {
                let v = entries[(i, j)];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NumericalFailure(format!("non-finite channel entry at ({i}, {j})")));
                }
                frobenius_sq += v.norm_sqr();
            }
        }
        Ok(ChannelMatrix { entries, wavelength, variant, frobenius_sq, class: PairClass::Mixed })
    }

    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn variant(&self) -> KernelVariant {
        self.variant
    }
    pub fn frobenius_sq(&self) -> f64 {
        self.frobenius_sq
    }
    pub fn class(&self) -> PairClass {
        self.class
    }
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }
    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Multiply every entry by a real constant.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for j in 0..out.entries.ncols() {
            for i in 0..out.entries.nrows() {
                out.entries[(i, j)] *= c;
            }
        }
        out.frobenius_sq *= c * c;
        out
    }
}

/// Assemble the channel from `t` (columns) to `r` (rows).
pub fn assemble_channel(t: &SampledRegion, r: &SampledRegion, kernel: &Kernel) -> Result<ChannelMatrix> {
    assemble_channel_with(t, r, kernel, AssemblyOptions::default())
}

pub fn assemble_channel_with(
    t: &SampledRegion,
    r: &SampledRegion,
    kernel: &Kernel,
    opts: AssemblyOptions,
) -> Result<ChannelMatrix> {
    if t.ambient_dim() != r.ambient_dim() {
        return Err(invalid(format!(
            "regions live in different dimensions ({}D vs {}D)",
            t.ambient_dim(),
            r.ambient_dim()
        )));
    }
    if kernel.variant().ambient_dim() != t.ambient_dim() {
        return Err(invalid(format!(
            "kernel {:?} does not match {}D regions",
            kernel.variant(),
            t.ambient_dim()
        )));
    }
    let guard = opts.overlap_guard * kernel.wavelength();
    let (nr, nt) = (r.len(), t.len());
    let mut entries = Mat::<Complex64>::zeros(nr, nt);
    let sqrt_wr: Vec<f64> = r.weights().iter().map(|w| w.sqrt()).collect();
    let rp = r.points();

    let (min_distance, frobenius_sq) = entries
        .as_mut()
        .par_col_iter_mut()
        .enumerate()
        .map(|(j, mut col)| {
            let tp = t.points()[j];
            let swt = t.weights()[j].sqrt();
            let mut min_d = f64::INFINITY;
            let mut fro = 0.0;
            for i in 0..nr {
                let dist = (rp[i] - tp).norm();
                min_d = min_d.min(dist);
                let v = if dist > guard { kernel.eval_unchecked(dist) * (sqrt_wr[i] * swt) } else { Complex64::ZERO };
                fro += v.norm_sqr();
                col[i] = v;
            }
            (min_d, fro)
        })
        .collect::<Vec<_>>()
        .into_iter()
        // Sequential fold keeps the sum independent of the thread count.
        .fold((f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1 + b.1));

    if min_distance <= guard {
        return Err(Error::RegionsOverlap { min_distance, guard });
    }
    if !frobenius_sq.is_finite() {
        return Err(Error::NumericalFailure("non-finite channel entries".into()));
    }
    Ok(ChannelMatrix {
        entries,
        wavelength: kernel.wavelength(),
        variant: kernel.variant(),
        frobenius_sq,
        class: PairClass::of(t, r),
    })
}

/// Descending eigenvalues `ζ_n ≥ 0` of the correlation operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    wavelength: f64,
    sum: f64,
    class: PairClass,
    /// Index of the originating spectrum for each value, after merging.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sources: Option<Vec<usize>>,
}

impl Spectrum {
    /// Build from arbitrary nonnegative values; sorts and applies the floor.
    pub fn new(mut values: Vec<f64>, wavelength: f64, class: PairClass) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(invalid("wavelength must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("spectrum values must be finite"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let top = values.first().copied().unwrap_or(0.0);
        if top < 0.0 || values.iter().any(|&v| v < -EIGENVALUE_FLOOR * top.abs()) {
            return Err(invalid("spectrum values must be nonnegative"));
        }
        for v in &mut values {
            if *v < EIGENVALUE_FLOOR * top {
                *v = 0.0;
            }
        }
        let sum = values.iter().sum();
        Ok(Spectrum { values, wavelength, sum, class, sources: None })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values above the floor (the nonzero prefix).
    pub fn retained(&self) -> &[f64] {
        let n = self.values.iter().take_while(|&&v| v > 0.0).count();
        &self.values[..n]
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn sum(&self) -> f64 {
        self.sum
    }
    pub fn class(&self) -> PairClass {
        self.class
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
    pub fn sources(&self) -> Option<&[usize]> {
        self.sources.as_deref()
    }

    /// `(4π)²ζ_n/λ²` when eigenvalues carry area units, else `ζ_n/Σζ`.
    pub fn normalized(&self) -> Vec<f64> {
        let scale = if self.class.has_area_eigenvalues() {
            (4.0 * std::f64::consts::PI / self.wavelength).powi(2)
        } else if self.sum > 0.0 {
            1.0 / self.sum
        } else {
            0.0
        };
        self.values.iter().map(|v| v * scale).collect()
    }

    /// Same spectrum with every value multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out.sum *= c;
        out
    }

    /// Keep only the first `n` values (for storage/plotting).
    pub fn truncated(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.values.truncate(n);
        if let Some(s) = out.sources.as_mut() {
            s.truncate(n);
        }
        out
    }
}

/// Eigenvalues `ζ_n = σ_n(H)²` via a singular value decomposition of `H`.
pub fn compute_spectrum(h: &ChannelMatrix) -> Result<Spectrum> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(invalid("empty channel matrix"));
    }
    let sigma = singular_values(h.entries.as_ref())?;
    let values = sigma.into_iter().map(|s| s * s).collect();
    Spectrum::new(values, h.wavelength, h.class)
}

/// Same as [`compute_spectrum`] but consumes the matrix. Tall matrices are
/// first reduced in place by a QR factorization, so the SVD only ever sees
/// the small triangular factor and no second copy of `H` is made.
pub fn into_spectrum(h: ChannelMatrix) -> Result<Spectrum> {
    let (m, n) = (h.nrows(), h.ncols());
    if m == 0 || n == 0 {
        return Err(invalid("empty channel matrix"));
    }
    if m < 2 * n {
        return compute_spectrum(&h);
    }
    let ChannelMatrix { mut entries, wavelength, class, .. } = h;
    let par = faer::get_global_parallelism();
    let bs = qr::recommended_blocksize::<Complex64>(m, n);
    let mut coeff = Mat::<Complex64>::zeros(bs, n);
    let mut buf = MemBuffer::new(qr::qr_in_place_scratch::<Complex64>(m, n, bs, par, Default::default()));
    qr::qr_in_place(entries.as_mut(), coeff.as_mut(), par, MemStack::new(&mut buf), Default::default());
    drop(buf);
    let r = Mat::<Complex64>::from_fn(n, n, |i, j| if i <= j { entries[(i, j)] } else { Complex64::ZERO });
    drop(entries);
    let sigma = singular_values(r.as_ref())?;
    Spectrum::new(sigma.into_iter().map(|s| s * s).collect(), wavelength, class)
}

fn singular_values(a: faer::MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    a.singular_values().map_err(|e| Error::NumericalFailure(format!("SVD did not converge: {e:?}")))
}

/// Spectrum of the channel between `t` and `r`. The Green's function only
/// depends on distance, so the channel in the reverse direction is the
/// transpose and has the same singular values; the matrix is assembled with
/// the larger region along the rows to keep the factorization cheap.
pub fn channel_spectrum(t: &SampledRegion, r: &SampledRegion, kernel: &Kernel) -> Result<Spectrum> {
    let h = if r.len() >= t.len() { assemble_channel(t, r, kernel)? } else { assemble_channel(r, t, kernel)? };
    into_spectrum(h)
}

/// Concatenate and re-sort spectra computed at the same wavelength, tagging
/// each value with the index of the spectrum it came from.
pub fn merge_spectra(spectra: &[Spectrum]) -> Result<Spectrum> {
    let first = spectra.first().ok_or_else(|| invalid("nothing to merge"))?;
    let mut tagged = Vec::new();
    for (k, s) in spectra.iter().enumerate() {
        if (s.wavelength - first.wavelength).abs() > 1e-12 * first.wavelength {
            return Err(invalid(format!(
                "cannot merge spectra at different wavelengths ({} vs {})",
                s.wavelength, first.wavelength
            )));
        }
        tagged.extend(s.values.iter().enumerate().map(|(i, &v)| (v, k, i)));
    }
    tagged.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let class = if spectra.iter().all(|s| s.class == first.class) { first.class } else { PairClass::Mixed };
    Ok(Spectrum {
        values: tagged.iter().map(|t| t.0).collect(),
        wavelength: first.wavelength,
        sum: spectra.iter().map(|s| s.sum).sum(),
        class,
        sources: Some(tagged.iter().map(|t| t.1).collect()),
    })
}
