//! Scalar free-space Green's functions (time convention `e^{jωt}`).

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::j0_y0;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    /// `e^{−jkr}/(4πr)`.
    Scalar3d,
    /// `(j/4) H₀⁽²⁾(kr)`.
    Scalar2dExact,
    /// Large-`kr` form of [`KernelVariant::Scalar2dExact`].
    Scalar2dAsymptotic,
}

impl KernelVariant {
    pub fn ambient_dim(self) -> usize {
        match self {
            KernelVariant::Scalar3d => 3,
            _ => 2,
        }
    }

    /// Default kernel for regions living in `dim` dimensions.
    pub fn default_for_dim(dim: usize) -> Self {
        if dim == 2 {
            KernelVariant::Scalar2dExact
        } else {
            KernelVariant::Scalar3d
        }
    }
}

/// A Green's function at a fixed wavenumber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    variant: KernelVariant,
    wavenumber: f64,
}

impl Kernel {
    pub fn new(variant: KernelVariant, wavenumber: f64) -> Result<Self> {
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(invalid(format!("wavenumber must be positive, got {wavenumber}")));
        }
        Ok(Kernel { variant, wavenumber })
    }

    pub fn from_wavelength(variant: KernelVariant, wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        Self::new(variant, 2.0 * PI / wavelength)
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.wavenumber
    }

    pub fn eval(&self, r: f64) -> Result<Complex64> {
        match self.variant {
            KernelVariant::Scalar3d => green3d(r, self.wavenumber),
            v => green2d(r, self.wavenumber, v),
        }
    }

    /// Unchecked evaluation for hot loops; `r` must be positive.
    #[inline]
    pub(crate) fn eval_unchecked(&self, r: f64) -> Complex64 {
        let k = self.wavenumber;
        match self.variant {
            KernelVariant::Scalar3d => Complex64::from_polar(1.0 / (4.0 * PI * r), -k * r),
            KernelVariant::Scalar2dExact => hankel_kernel(k * r),
            KernelVariant::Scalar2dAsymptotic => asymptotic_2d(k * r),
        }
    }
}

/// `G₃(r) = e^{−jkr}/(4πr)`.
pub fn green3d(r: f64, k: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::SingularKernel(r));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("wavenumber must be positive, got {k}")));
    }
    Ok(Complex64::from_polar(1.0 / (4.0 * PI * r), -k * r))
}

/// `G₂(r)`, either exact `(j/4)H₀⁽²⁾(kr)` or its large-argument form.
///
/// The asymptotic form is `(j/4)√(2/(πkr)) e^{−j(kr−π/4)}`, whose modulus is
/// `√(λ/r)/(4π)`.
pub fn green2d(r: f64, k: f64, variant: KernelVariant) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::SingularKernel(r));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("wavenumber must be positive, got {k}")));
    }
    match variant {
        KernelVariant::Scalar2dExact => Ok(hankel_kernel(k * r)),
        KernelVariant::Scalar2dAsymptotic => Ok(asymptotic_2d(k * r)),
        KernelVariant::Scalar3d => Err(invalid("green2d called with the 3D kernel variant")),
    }
}

/// `H₀⁽²⁾(x) = J₀(x) − jY₀(x)`.
pub fn hankel2_0(x: f64) -> Complex64 {
    let (j, y) = j0_y0(x);
    Complex64::new(j, -y)
}

#[inline]
fn hankel_kernel(x: f64) -> Complex64 {
    // (j/4)(J₀ − jY₀) = (Y₀ + jJ₀)/4
    let (j, y) = j0_y0(x);
    Complex64::new(0.25 * y, 0.25 * j)
}

#[inline]
fn asymptotic_2d(x: f64) -> Complex64 {
    let amp = 0.25 * (2.0 / (PI * x)).sqrt();
    // j · e^{−j(x − π/4)} = e^{−j(x − 3π/4)}
    Complex64::from_polar(amp, -(x - 3.0 * FRAC_PI_4))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 0.3;

    fn k() -> f64 {
        2.0 * PI / LAMBDA
    }

    #[test]
    fn full_period_phase() {
        let g = green3d(LAMBDA, k()).unwrap();
        assert!((g.re - 1.0 / (4.0 * PI * LAMBDA)).abs() < 1e-12);
        assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn half_period_phase() {
        let g = green3d(LAMBDA / 2.0, k()).unwrap();
        assert!((g.re + 1.0 / (2.0 * PI * LAMBDA)).abs() < 1e-12);
        assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn modulus_and_phase_3d() {
        for r in [1e-4, 0.01, 0.7, 3.0, 123.4] {
            let g = green3d(r, k()).unwrap();
            assert!((g.norm() - 1.0 / (4.0 * PI * r)).abs() <= 1e-15 / r);
            let wrapped = (g.arg() + k() * r).rem_euclid(2.0 * PI);
            assert!(wrapped < 1e-9 || 2.0 * PI - wrapped < 1e-9);
        }
    }

    #[test]
    fn exact_2d_at_unit_argument() {
        // kr = 1: (j/4)(J₀(1) − jY₀(1))
        let g = green2d(1.0 / k(), k(), KernelVariant::Scalar2dExact).unwrap();
        let (j0, y0) = (0.765_197_686_557_966_6, 0.088_256_964_215_676_96);
        assert!((g.re - y0 / 4.0).abs() < 1e-13);
        assert!((g.im - j0 / 4.0).abs() < 1e-13);
    }

    #[test]
    fn asymptotic_2d_accuracy() {
        for kr in [50.0, 100.0, 1000.0] {
            let r = kr / k();
            let e = green2d(r, k(), KernelVariant::Scalar2dExact).unwrap();
            let a = green2d(r, k(), KernelVariant::Scalar2dAsymptotic).unwrap();
            let err = (e - a).norm() / e.norm();
            assert!(err < 5e-3, "kr = {kr}: {err}");
            assert!((a.norm() - (LAMBDA / r).sqrt() / (4.0 * PI)).abs() < 1e-15);
        }
        let r = 100.0 / k();
        let e = green2d(r, k(), KernelVariant::Scalar2dExact).unwrap();
        let a = green2d(r, k(), KernelVariant::Scalar2dAsymptotic).unwrap();
        // The leading neglected term is |Q₀| ≈ 1/(8kr).
        assert!((e - a).norm() / e.norm() < 1.5 / (8.0 * 100.0));
    }

    #[test]
    fn small_argument_logarithm() {
        let x = 1e-3;
        let h = hankel2_0(x);
        assert!((h.re - 1.0).abs() < 1e-6);
        let lead = -(2.0 / PI) * ((x / 2.0).ln() + 0.577_215_664_901_532_9);
        // The next term is O(x² ln x).
        assert!((h.im - lead).abs() < 1e-5);
        assert!(h.im > 0.0 && h.im > -(2.0 / PI) * x.ln() - 1.0);
    }

    #[test]
    fn rejects_non_positive_distance() {
        assert!(matches!(green3d(0.0, 1.0), Err(Error::SingularKernel(_))));
        assert!(matches!(green2d(-1.0, 1.0, KernelVariant::Scalar2dExact), Err(Error::SingularKernel(_))));
    }
}
