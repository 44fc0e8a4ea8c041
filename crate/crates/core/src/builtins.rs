//! Built-in scenarios for the standard configurations.
//!
//! Wavelengths are reduced where the original electrical sizes would need
//! matrices far beyond desk scale; each entry states what it targets.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{Pose, RegionSpec, Vec3};
use crate::scenario::{
    Metric, ReceiverMode, Receivers, ScenarioConfig, ShadowChoice, Sweep, SweepAxis, SweepScale, Wavelengths,
    DEFAULT_MAX_SAMPLES, DEFAULT_POINTS_PER_WAVELENGTH,
};
use crate::shadow::LowFreqCorrection;

pub struct Builtin {
    pub name: &'static str,
    pub figure: &'static str,
    /// What the scenarios are expected to show.
    pub summary: &'static str,
    build: fn() -> Result<Vec<ScenarioConfig>>,
}

impl Builtin {
    pub fn configs(&self) -> Result<Vec<ScenarioConfig>> {
        (self.build)()
    }
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "fig1_discs",
        figure: "Fig. 1",
        summary: "Coaxial discs at d = a. Corners sit at N_a: 94.2 (r = a, a = 5λ), 23.6 (r = a, a = 2.5λ), \
                  60.8 (r = 8a, a = 2.5λ); the r = 8a spectrum spreads by about 10× before its corner.",
        build: fig1,
    },
    Builtin {
        name: "fig1_discs_full",
        figure: "Fig. 1",
        summary: "Coaxial discs r = a = 10λ at d = a, about 7,900 samples per side (slow). Corner near 380, N_a = 377.",
        build: fig1_full,
    },
    Builtin {
        name: "fig3_discs_lines",
        figure: "Fig. 3",
        summary: "N_a + 1, N_e, N_r, N_c, N_h against electrical size for discs (d = a) and 2D lines (d = ℓ); \
                  N_e < N_r < N_a ≈ N_c, power laws α/λ² and α/λ.",
        build: fig3,
    },
    Builtin {
        name: "fig4_lines",
        figure: "Fig. 4",
        summary: "Equal parallel 3D lines, d/ℓ from 0.05 to 10 at λ ∈ {1, 2, 4}·0.01ℓ; numerical N_e approaches \
                  the closed form as λ decreases, corners follow 2(√(1+β²) − 1)/β·ℓ/λ.",
        build: fig4,
    },
    Builtin {
        name: "fig5_discs_sweep",
        figure: "Fig. 5",
        summary: "Equal coaxial discs, d/a ∈ {0.1, …, 3.2} at λ ∈ {0.8, 0.4, 0.2}a (desk-scaled from \
                  {0.04, 0.02, 0.01}a); N_e⁰ ≤ N_a with agreement for d > a.",
        build: fig5,
    },
    Builtin {
        name: "fig6_discs_spectra",
        figure: "Fig. 6",
        summary: "Eigenspectra of equal coaxial discs at λ = 0.2a (desk-scaled from 0.01a) for d/a ∈ {0.1, …, 3.2}; \
                  N_e ≈ N_r ≈ N_a only at the larger distances.",
        build: fig6,
    },
    Builtin {
        name: "fig7_cases",
        figure: "Fig. 7",
        summary: "Tx line ℓ, λ = 0.002ℓ, four receivers with equal L_TR ≈ 1.96ℓ. (a) line 10ℓ at d = ℓ: \
                  ζ₁ ≈ 25 ≤ 31.25, N_e ≈ 0.4N_a, N_r ≈ 0.66N_a. (b) concentric arc: ζ₁ ≤ 5.6, N_e ≈ 0.84N_a, \
                  N_r ≈ 0.93N_a. (c) shoulders + arc, L_TR/ℓ ≈ 0.13 + 1.83. (d) as (c) with merged split spectra.",
        build: fig7,
    },
    Builtin {
        name: "fig8_squares",
        figure: "Fig. 8",
        summary: "Six 2D receivers with L_TR ≈ 0.138ℓ at λ = 0.004ℓ (desk-scaled from 0.001ℓ). (b) is flat at \
                  level 1, (a)/(c) flat but higher, (d) uneven; (e)/(f) keep the shadow of (b) but N_e drops \
                  to roughly 0.3 to 0.5 N_a.",
        build: fig8,
    },
];

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

fn config(name: &str, description: &str, tx: RegionSpec, rx: Receivers, lambda: Wavelengths) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        transmitter: tx,
        receiver: rx,
        receiver_mode: ReceiverMode::Joint,
        hidden_receivers: Vec::new(),
        wavelength: Some(lambda),
        points_per_wavelength: DEFAULT_POINTS_PER_WAVELENGTH,
        kernel: None,
        metrics: Metric::ALL.to_vec(),
        sweep: None,
        output: None,
        max_samples_per_side: DEFAULT_MAX_SAMPLES,
        low_freq_correction: LowFreqCorrection::None,
        shadow_method: ShadowChoice::Auto,
    }
}

fn disc_at(radius: f64, z: f64) -> Result<RegionSpec> {
    RegionSpec::disc3d(radius, Pose::translation(Vec3::new(0.0, 0.0, z)))
}

fn one(spec: RegionSpec) -> Receivers {
    Receivers::One(spec)
}

fn d_sweep(start: f64, stop: f64, count: usize) -> Option<Sweep> {
    Some(Sweep { axis: SweepAxis::D, start, stop, count, scale: SweepScale::Log, direction: None })
}

fn fig1() -> Result<Vec<ScenarioConfig>> {
    let tx = disc_at(1.0, 0.0)?;
    let mut big = config(
        "fig1_r8a_a2.5",
        "r = 8a, a = 2.5λ, d = a",
        tx.clone(),
        one(disc_at(8.0, 1.0)?),
        Wavelengths::One(0.4),
    );
    big.max_samples_per_side = 40_000;
    Ok(vec![
        config("fig1_r1a_a5", "r = a = 5λ, d = a", tx.clone(), one(disc_at(1.0, 1.0)?), Wavelengths::One(0.2)),
        config("fig1_r1a_a2.5", "r = a = 2.5λ, d = a", tx, one(disc_at(1.0, 1.0)?), Wavelengths::One(0.4)),
        big,
    ])
}

fn fig1_full() -> Result<Vec<ScenarioConfig>> {
    let tx = disc_at(1.0, 0.0)?;
    Ok(vec![config("fig1_r1a_a10", "r = a = 10λ, d = a", tx, one(disc_at(1.0, 1.0)?), Wavelengths::One(0.1))])
}

fn fig3() -> Result<Vec<ScenarioConfig>> {
    let lambda_sweep = |start, stop, count| Sweep {
        axis: SweepAxis::Lambda,
        start,
        stop,
        count,
        scale: SweepScale::Log,
        direction: None,
    };
    let mut discs = config("fig3_discs", "discs a at d = a", disc_at(1.0, 0.0)?, one(disc_at(1.0, 1.0)?), Wavelengths::One(1.0));
    discs.wavelength = None;
    discs.sweep = Some(lambda_sweep(0.2, 4.0, 9));
    discs.low_freq_correction = LowFreqCorrection::Planar;

    let mut lines = config(
        "fig3_lines",
        "2D lines ℓ at d = ℓ",
        RegionSpec::segment2d(1.0, Pose::IDENTITY)?,
        one(RegionSpec::segment2d(1.0, Pose::planar(0.0, 1.0, 0.0))?),
        Wavelengths::One(1.0),
    );
    lines.wavelength = None;
    lines.sweep = Some(lambda_sweep(0.01, 4.0, 12));
    lines.low_freq_correction = LowFreqCorrection::Planar;
    Ok(vec![discs, lines])
}

fn fig4() -> Result<Vec<ScenarioConfig>> {
    let mut cfg = config(
        "fig4_lines",
        "equal parallel 3D lines",
        RegionSpec::segment3d(1.0, Pose::IDENTITY)?,
        one(RegionSpec::segment3d(1.0, Pose::translation(Vec3::new(0.0, 1.0, 0.0)))?),
        Wavelengths::Many(vec![0.01, 0.02, 0.04]),
    );
    cfg.sweep = d_sweep(0.05, 10.0, 14);
    Ok(vec![cfg])
}

fn fig5() -> Result<Vec<ScenarioConfig>> {
    let mut cfg = config(
        "fig5_discs",
        "equal coaxial discs",
        disc_at(1.0, 0.0)?,
        one(disc_at(1.0, 1.0)?),
        Wavelengths::Many(vec![0.8, 0.4, 0.2]),
    );
    cfg.sweep = d_sweep(0.1, 3.2, 6);
    Ok(vec![cfg])
}

fn fig6() -> Result<Vec<ScenarioConfig>> {
    let mut cfg =
        config("fig6_discs", "equal coaxial discs", disc_at(1.0, 0.0)?, one(disc_at(1.0, 1.0)?), Wavelengths::One(0.2));
    cfg.sweep = d_sweep(0.1, 3.2, 6);
    cfg.metrics = vec![Metric::Ne, Metric::Nr, Metric::Nc, Metric::Na, Metric::AvgLevel];
    Ok(vec![cfg])
}

/// Half-span of the case (b) arc of radius 5ℓ whose shadow length equals
/// that of the 10ℓ line at distance ℓ.
pub const FIG7_ARC_HALF_SPAN_DEG: f64 = 78.69;
pub const FIG7_ARC_RADIUS: f64 = 5.0;
/// Where the flat shoulders of cases (c)/(d) begin.
pub const FIG7_SHOULDER_START: f64 = 2.3;

/// Receiver of cases (c)/(d): two shoulders on the line `y = ℓ` from
/// `|x| = x₀` to `5ℓ`, joined by an arc about the transmitter centre through
/// `(±x₀, ℓ)`. Order: left shoulder, arc, right shoulder.
pub fn fig7_hybrid_parts() -> Result<Vec<RegionSpec>> {
    let x0 = FIG7_SHOULDER_START;
    let len = 5.0 - x0;
    let mid = x0 + len / 2.0;
    let rho = x0.hypot(1.0);
    let span = 2.0 * x0.atan();
    Ok(vec![
        RegionSpec::segment2d(len, Pose::planar(-mid, 1.0, 0.0))?,
        RegionSpec::arc2d(rho, span, Pose::IDENTITY)?,
        RegionSpec::segment2d(len, Pose::planar(mid, 1.0, 0.0))?,
    ])
}

pub fn fig7_configs() -> Result<Vec<ScenarioConfig>> {
    let tx = RegionSpec::segment2d(1.0, Pose::IDENTITY)?;
    let lambda = Wavelengths::One(0.002);
    let metrics = vec![Metric::Ne, Metric::Nr, Metric::Nc, Metric::Na, Metric::CouplingStrength, Metric::AvgLevel, Metric::Bounds];
    let mk = |name: &str, desc: &str, rx: Receivers| {
        let mut c = config(name, desc, tx.clone(), rx, lambda.clone());
        c.metrics = metrics.clone();
        c.max_samples_per_side = 40_000;
        c
    };
    let a = mk("fig7a_line", "receiver line 10ℓ at d = ℓ", one(RegionSpec::segment2d(10.0, Pose::planar(0.0, 1.0, 0.0))?));
    let b = mk(
        "fig7b_arc",
        "concentric arc, radius 5ℓ",
        one(RegionSpec::arc2d(FIG7_ARC_RADIUS, 2.0 * FIG7_ARC_HALF_SPAN_DEG.to_radians(), Pose::IDENTITY)?),
    );
    let c = mk("fig7c_hybrid", "flat shoulders joined by an arc", Receivers::Many(fig7_hybrid_parts()?));
    let mut d = mk("fig7d_split", "case (c) with shoulders and arc as separate channels", Receivers::Many(fig7_hybrid_parts()?));
    d.receiver_mode = ReceiverMode::Split;
    Ok(vec![a, b, c, d])
}

fn fig7() -> Result<Vec<ScenarioConfig>> {
    fig7_configs()
}

/// Separation of the case (b) lines, chosen for `L_TR ≈ 0.138ℓ`.
pub const FIG8_DISTANCE: f64 = 7.21;

fn square(side: f64, cx: f64, cy: f64, angle: f64) -> Result<RegionSpec> {
    let h = side / 2.0;
    let mut v: Vec<[f64; 2]> = [[-h, -h], [h, -h], [h, h], [-h, h]].to_vec();
    v.push(v[0]);
    RegionSpec::polyline2d(v, Pose::planar(cx, cy, angle))
}

pub fn fig8_configs() -> Result<Vec<ScenarioConfig>> {
    let tx = RegionSpec::segment2d(1.0, Pose::IDENTITY)?;
    let lambda = Wavelengths::One(0.004);
    let d = FIG8_DISTANCE;
    let mk = |name: &str, desc: &str, rx: Receivers| {
        let mut c = config(name, desc, tx.clone(), rx, lambda.clone());
        c.metrics = vec![Metric::Ne, Metric::Nr, Metric::Nc, Metric::Na, Metric::CouplingStrength, Metric::AvgLevel, Metric::Bounds];
        c
    };
    let seg = |len: f64, x: f64, y: f64, deg: f64| RegionSpec::segment2d(len, Pose::planar(x, y, deg.to_radians()));
    let centre = d + 0.5;
    let mut e = mk(
        "fig8e_nested_squares",
        "square of (f) with two inscribed squares behind its front face",
        Receivers::Many(vec![
            square(1.0, 0.0, centre, 0.0)?,
            square(1.0 / 2f64.sqrt(), 0.0, centre, PI / 4.0)?,
            square(0.5, 0.0, centre, 0.0)?,
        ]),
    );
    e.hidden_receivers = vec![1, 2];
    Ok(vec![
        mk("fig8a_tilted", "receiver 2ℓ tilted by 55° at 8.36ℓ", one(seg(2.0, 0.0, 8.36, 55.0)?)),
        mk("fig8b_parallel", "parallel line ℓ at 7.21ℓ", one(seg(1.0, 0.0, d, 0.0)?)),
        mk("fig8c_offset", "parallel line 2ℓ offset by 40° at 8.58ℓ", one(seg(2.0, 5.52, 6.57, 0.0)?)),
        mk("fig8d_close", "line ℓ tilted by 70° at 2.5ℓ", one(seg(1.0, 0.0, 2.5, 70.0)?)),
        e,
        mk("fig8f_square", "square ℓ × ℓ whose front face is the line of (b)", one(square(1.0, 0.0, centre, 0.0)?)),
    ])
}

fn fig8() -> Result<Vec<ScenarioConfig>> {
    fig8_configs()
}
