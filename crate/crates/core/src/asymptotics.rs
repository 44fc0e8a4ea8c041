//! Closed-form high-frequency results for canonical geometries.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::geometry::{sample_region, RegionSpec, Shape};
use crate::metrics::coupling_strength_quadrature;
use crate::quadrature::integrate_2d;

/// Below this `β` the line formulas switch to their series expansions.
pub const SERIES_BETA: f64 = 1e-3;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn check_lines(l: f64, d: f64, lambda: f64) -> Result<f64> {
    check_positive("length", l)?;
    check_positive("distance", d)?;
    check_positive("wavelength", lambda)?;
    Ok(l / d)
}

/// Asymptotic effective NDoF of two equal parallel lines in 3D,
///
/// `(ℓ/2λ) (ln(1+β²) − 2β atan β)² / (β² asinh β − β√(β²+1) + β)`, `β = ℓ/d`.
pub fn ne0_lines_3d(l: f64, d: f64, lambda: f64) -> Result<f64> {
    let beta = check_lines(l, d, lambda)?;
    let per = if beta < SERIES_BETA {
        let b2 = beta * beta;
        beta * (1.0 - b2 / 4.0 + 83.0 * b2 * b2 / 720.0)
    } else {
        let s = (1.0 + beta * beta).sqrt();
        let num = (beta * beta).ln_1p() - 2.0 * beta * beta.atan();
        // β√(β²+1) − β = β³/(s+1)
        let den = beta * beta * beta.asinh() - beta.powi(3) / (s + 1.0);
        0.5 * num * num / den
    };
    Ok(per * l / lambda)
}

/// Leading behaviour of [`ne0_lines_3d`] as `d → 0`: `π²ℓ/(2λ ln 2β)`.
pub fn ne0_lines_3d_short_distance(l: f64, d: f64, lambda: f64) -> Result<f64> {
    let beta = check_lines(l, d, lambda)?;
    if beta <= 0.5 {
        return Err(invalid(format!("short-distance limit needs β > 1/2, got {beta}")));
    }
    Ok(PI * PI * l / (2.0 * lambda * (2.0 * beta).ln()))
}

/// Asymptotic effective NDoF of two equal parallel lines in 2D,
///
/// `(ℓ/λ) 4β(asinh β − √(1+β⁻²) + β⁻¹)² / (2/3 + β asinh β − √(1+β²) + (1+β²)^{3/2}/3)`.
pub fn ne0_lines_2d(l: f64, d: f64, lambda: f64) -> Result<f64> {
    let beta = check_lines(l, d, lambda)?;
    let per = if beta < SERIES_BETA {
        let b2 = beta * beta;
        beta * (1.0 - b2 / 4.0 + 31.0 * b2 * b2 / 360.0)
    } else {
        let s = (1.0 + beta * beta).sqrt();
        // β⁻¹ − √(1+β⁻²) = −β/(1+s)
        let x = beta.asinh() - beta / (1.0 + s);
        // s³/3 − s + 2/3 = (s−1)²(s+2)/3 with s − 1 = β²/(s+1)
        let sm1 = beta * beta / (s + 1.0);
        let den = beta * beta.asinh() + sm1 * sm1 * (s + 2.0) / 3.0;
        4.0 * beta * x * x / den
    };
    Ok(per * l / lambda)
}

/// Shadow-length NDoF of two equal parallel lines, `(2ℓ/λ)(√(1+β²) − 1)/β`.
pub fn shadow_length_two_lines(l: f64, d: f64, lambda: f64) -> Result<f64> {
    let beta = check_lines(l, d, lambda)?;
    let s = (1.0 + beta * beta).sqrt();
    Ok(2.0 * l * beta / (lambda * (s + 1.0)))
}

/// `∫₀^r∫₀^a ρρ′ dρ dρ′ / (√((ρ+ρ′)²+d²) √((ρ−ρ′)²+d²))` for coaxial discs.
///
/// This is the azimuthally reduced `∫∫ dS dS′/R²` divided by `4π²`, so the
/// coupling strength of the disc pair is this value over four.
pub fn discs_coupling(a: f64, r: f64, d: f64) -> Result<f64> {
    check_positive("radius", a)?;
    check_positive("radius", r)?;
    check_positive("distance", d)?;
    let f = |rho_p: f64, rho: f64| {
        let s = rho + rho_p;
        let t = rho - rho_p;
        rho * rho_p / ((s * s + d * d).sqrt() * (t * t + d * d).sqrt())
    };
    let breaks = |rho_p: f64| {
        if rho_p > 0.0 && rho_p < a {
            vec![0.0, rho_p, a]
        } else {
            vec![0.0, a]
        }
    };
    let est = integrate_2d(f, 0.0, r, breaks, 1e-9)?;
    if !(est.error <= 1e-6 * est.value.abs()) {
        return Err(Error::QuadratureNonConvergence { error: est.error, tolerance: 1e-6 * est.value.abs() });
    }
    Ok(est.value)
}

/// Coupling strength `‖H‖²_F` of coaxial discs from [`discs_coupling`].
pub fn discs_coupling_strength(a: f64, r: f64, d: f64) -> Result<f64> {
    Ok(discs_coupling(a, r, d)? / 4.0)
}

/// Asymptotic effective NDoF of parallel planar regions,
/// `‖H‖⁴_F d² (4π)⁴ / (λ² A_T A_R)`.
///
/// Coaxial discs use [`discs_coupling`]; other parallel pairs use a
/// Cartesian double sum resolving the separation `d`.
pub fn ne0_planar(t: &RegionSpec, r: &RegionSpec, d: f64, lambda: f64) -> Result<f64> {
    check_positive("distance", d)?;
    check_positive("wavelength", lambda)?;
    t.validate()?;
    r.validate()?;
    let (Some(nt), Some(nr)) = (t.plane_normal(), r.plane_normal()) else {
        return Err(Error::UnsupportedConfiguration("planar asymptotics need two surfaces in 3D".into()));
    };
    if (nt.dot(nr).abs() - 1.0).abs() > 1e-9 {
        return Err(Error::UnsupportedConfiguration("planar asymptotics need parallel regions".into()));
    }
    let offset = r.pose().origin - t.pose().origin;
    let separation = offset.dot(nt).abs();
    if (separation - d).abs() > 1e-9 * d.max(separation) {
        return Err(invalid(format!("plane separation is {separation}, not the given d = {d}")));
    }
    let (area_t, area_r) = (t.measure(), r.measure());
    let lateral = (offset - nt * offset.dot(nt)).norm();
    let h2 = match (t.shape(), r.shape()) {
        (Shape::Disc3d { radius: a }, Shape::Disc3d { radius: b }) if lateral <= 1e-12 * d => {
            discs_coupling_strength(*a, *b, d)?
        }
        _ => {
            // The 1/R² kernel varies on the scale of d (and of the regions).
            let step = d.min(t.diameter()).min(r.diameter()) / 12.0;
            let ts = sample_region(t, 2.0 * step, 2.0)?;
            let rs = sample_region(r, 2.0 * step, 2.0)?;
            coupling_strength_quadrature(&ts, &rs, 2, lambda)?
        }
    };
    Ok(h2 * h2 * d * d * (4.0 * PI).powi(4) / (lambda * lambda * area_t * area_r))
}

/// Number of propagating spherical modes up to order `L`, `2L(L+2)`.
pub fn sphere_mode_count(order: u32) -> u64 {
    let l = order as u64;
    2 * l * (l + 2)
}

/// Large-`ka` mode count `2(ka)²`.
pub fn sphere_mode_count_asymptotic(ka: f64) -> f64 {
    2.0 * ka * ka
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose, Vec3};
    use crate::shadow::shadow_two_discs;

    #[test]
    fn lines_3d_reference_values() {
        // High-precision evaluations of the closed form.
        for (beta, want) in [(1.0, 0.824_415_599_847_061_6), (0.1, 0.099_751_146_157_606_11), (10.0, 1.469_994_091_434_596_8)] {
            let v = ne0_lines_3d(1.0, 1.0 / beta, 1.0).unwrap();
            assert!((v - want).abs() < 1e-12 * want, "β = {beta}: {v}");
        }
    }

    #[test]
    fn lines_series_continuity() {
        for f in [ne0_lines_3d, ne0_lines_2d] {
            let below = f(1.0, 1.0 / (SERIES_BETA * (1.0 - 1e-12)), 1.0).unwrap();
            let above = f(1.0, 1.0 / (SERIES_BETA * (1.0 + 1e-12)), 1.0).unwrap();
            assert!((below / above - 1.0).abs() < 1e-11, "{below} {above}");
        }
    }

    #[test]
    fn paraxial_limit_of_lines() {
        let (l, lambda) = (1.0, 0.01);
        for d in [1e2, 1e4, 1e7] {
            let want = l * l / (d * lambda);
            for v in [ne0_lines_3d(l, d, lambda), ne0_lines_2d(l, d, lambda), shadow_length_two_lines(l, d, lambda)] {
                assert!((v.unwrap() / want - 1.0).abs() < 1.0 / (d * d) + 1e-14);
            }
        }
    }

    #[test]
    fn short_distance_vanishes_logarithmically() {
        let mut prev = f64::INFINITY;
        for e in [3, 6, 9, 12] {
            let d = 10f64.powi(-e);
            let v = ne0_lines_3d(1.0, d, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
            let lead = ne0_lines_3d_short_distance(1.0, d, 1.0).unwrap();
            // Next-order term is a relative 1/ln(2β).
            let ratio = v / lead;
            let lg = (2.0 / d).ln();
            assert!(ratio > 1.0 && ratio < 1.0 + 1.5 / lg, "β = 1e{e}: {ratio}");
        }
    }

    #[test]
    fn two_line_shadow_length() {
        assert!((shadow_length_two_lines(1.0, 1.0, 1.0).unwrap() - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let v = shadow_length_two_lines(1.0, 1e-9, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn line_estimator_ordering() {
        let mut beta: f64 = 1.0;
        while beta <= 1e3 {
            let d = 1.0 / beta;
            let n2 = ne0_lines_2d(1.0, d, 1.0).unwrap();
            let n3 = ne0_lines_3d(1.0, d, 1.0).unwrap();
            let na = shadow_length_two_lines(1.0, d, 1.0).unwrap();
            assert!(n2 <= n3 && n3 <= na, "β = {beta}: {n2} {n3} {na}");
            beta *= 1.1;
        }
    }

    #[test]
    fn lines_2d_and_3d_agree_when_separated() {
        for d in [2.0, 3.0, 5.0, 10.0] {
            let n2 = ne0_lines_2d(1.0, d, 1.0).unwrap();
            let n3 = ne0_lines_3d(1.0, d, 1.0).unwrap();
            assert!((n2 / n3 - 1.0).abs() < 0.05, "d = {d}");
        }
    }

    #[test]
    fn lines_3d_single_hump() {
        let vals: Vec<f64> = (0..400).map(|i| ne0_lines_3d(1.0, 10f64.powf(-3.0 + i as f64 * 0.015), 1.0).unwrap()).collect();
        let peak = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(peak > 0 && peak < vals.len() - 1);
        assert!(vals[..peak].windows(2).all(|w| w[0] < w[1]));
        assert!(vals[peak..].windows(2).all(|w| w[0] > w[1]));
    }

    // Cartesian oracle: ∫∫ dS dS′/R² over both discs with a fine polar midpoint grid,
    // exploiting the azimuthal symmetry of one disc.
    fn disc_oracle(a: f64, d: f64) -> f64 {
        let (nr, nphi) = (400, 800);
        let mut sum = 0.0;
        for i in 0..nr {
            let rho = (i as f64 + 0.5) * a / nr as f64;
            for j in 0..nr {
                let rp = (j as f64 + 0.5) * a / nr as f64;
                let mut inner = 0.0;
                for k in 0..nphi {
                    let phi = (k as f64 + 0.5) * 2.0 * PI / nphi as f64;
                    inner += 1.0 / (rho * rho + rp * rp - 2.0 * rho * rp * phi.cos() + d * d);
                }
                sum += rho * rp * inner * 2.0 * PI / nphi as f64;
            }
        }
        sum * 2.0 * PI * (a / nr as f64).powi(2)
    }

    #[test]
    fn disc_coupling_matches_cartesian_oracle() {
        let v = discs_coupling(1.0, 1.0, 1.0).unwrap();
        let oracle = disc_oracle(1.0, 1.0) / (4.0 * PI * PI);
        assert!((v / oracle - 1.0).abs() < 1e-3, "{v} vs {oracle}");
    }

    #[test]
    fn disc_coupling_far_and_monotone() {
        let d = 1e3;
        let v = discs_coupling(1.0, 2.0, d).unwrap();
        // (A_T A_R/d²)/(4π²) = (π·π·4)/(4π² d²)
        assert!((v * d * d / 1.0 - 1.0).abs() < 1e-5, "{}", v * d * d);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let v = discs_coupling(1.0, 1.0, 0.05 * 1.4f64.powi(i)).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn planar_bound_and_paraxial_agreement() {
        let lambda = 0.01;
        let t = RegionSpec::disc3d(1.0, Pose::IDENTITY).unwrap();
        for d in [0.1, 0.4, 1.6, 3.2] {
            let r = RegionSpec::disc3d(1.0, Pose::translation(Vec3::new(0.0, 0.0, d))).unwrap();
            let ne0 = ne0_planar(&t, &r, d, lambda).unwrap();
            let na = shadow_two_discs(1.0, 1.0, d) / (lambda * lambda);
            assert!(ne0 <= na, "d = {d}");
            if d == 3.2 {
                assert!((ne0 / na - 1.0).abs() < 0.1);
            }
        }
    }

    #[test]
    fn planar_cartesian_path_matches_discs() {
        let lambda = 0.05;
        let d = 0.7;
        let t = RegionSpec::disc3d(1.0, Pose::IDENTITY).unwrap();
        let r = RegionSpec::disc3d(1.0, Pose::translation(Vec3::new(0.0, 0.0, d))).unwrap();
        let exact = ne0_planar(&t, &r, d, lambda).unwrap();
        // A tiny lateral shift forces the Cartesian path.
        let rs = RegionSpec::disc3d(1.0, Pose::translation(Vec3::new(1e-7, 0.0, d))).unwrap();
        let cart = ne0_planar(&t, &rs, d, lambda).unwrap();
        assert!((cart / exact - 1.0).abs() < 0.01, "{cart} vs {exact}");
    }

    #[test]
    fn planar_rejects_tilted_and_curves() {
        let t = RegionSpec::disc3d(1.0, Pose::IDENTITY).unwrap();
        let tilted = t
            .moved(&crate::geometry::Rotation::about_axis(Vec3::X, 0.3), Vec3::new(0.0, 0.0, 2.0))
            .unwrap();
        assert!(matches!(ne0_planar(&t, &tilted, 2.0, 0.1), Err(Error::UnsupportedConfiguration(_))));
        let line = RegionSpec::segment3d(1.0, Pose::IDENTITY).unwrap();
        assert!(matches!(ne0_planar(&line, &t, 2.0, 0.1), Err(Error::UnsupportedConfiguration(_))));
    }

    #[test]
    fn sphere_modes() {
        assert_eq!(sphere_mode_count(1), 6);
        assert_eq!(sphere_mode_count(10), 240);
        assert_eq!(sphere_mode_count_asymptotic(3.0), 18.0);
        assert_eq!(sphere_mode_count_asymptotic(100.0), 20000.0);
    }
}
