//! Scenario descriptions and the pipeline that turns them into reports.
//!
//! A scenario is a transmitter, one or more receivers, a wavelength (or a
//! list of them) and an optional sweep over separation, wavelength or
//! electrical size. Every sweep point yields one [`RunRecord`].

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{ne0_lines_2d, ne0_lines_3d, ne0_planar, shadow_length_two_lines};
use crate::channel::{channel_spectrum, merge_spectra, PairClass, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::geometry::{estimate_samples, sample_region, RegionKind, RegionSpec, Rotation, SampledRegion, Shape, Vec3};
use crate::greens::{Kernel, KernelVariant};
use crate::metrics::{eig_level_bounds, NdofReport};
use crate::shadow::{shadow_measure, shadow_ndof, shadow_two_discs, LowFreqCorrection};

pub const DEFAULT_POINTS_PER_WAVELENGTH: f64 = 5.0;
pub const DEFAULT_MAX_SAMPLES: usize = 12_000;
/// Upper limit on the number of points a single scenario may expand to.
pub const MAX_POINTS: usize = 10_000;

/// Estimators a scenario can ask for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[serde(rename = "n_e")]
    Ne,
    #[serde(rename = "n_r")]
    Nr,
    #[serde(rename = "n_c")]
    Nc,
    #[serde(rename = "n_h")]
    Nh,
    #[serde(rename = "n_a")]
    Na,
    Ne0,
    CouplingStrength,
    AvgLevel,
    Bounds,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Ne,
        Metric::Nr,
        Metric::Nc,
        Metric::Nh,
        Metric::Na,
        Metric::Ne0,
        Metric::CouplingStrength,
        Metric::AvgLevel,
        Metric::Bounds,
    ];

    fn needs_spectrum(self) -> bool {
        matches!(self, Metric::Ne | Metric::Nr | Metric::Nc | Metric::Nh | Metric::CouplingStrength | Metric::AvgLevel)
    }
}

/// One receiver or several that together form the receiving region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Receivers {
    One(RegionSpec),
    Many(Vec<RegionSpec>),
}

impl Receivers {
    pub fn parts(&self) -> &[RegionSpec] {
        match self {
            Receivers::One(r) => std::slice::from_ref(r),
            Receivers::Many(v) => v,
        }
    }
}

/// How several receivers are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverMode {
    /// One channel to the union of all parts.
    #[default]
    Joint,
    /// One channel per part; the eigenvalues are merged afterwards.
    Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Wavelengths {
    One(f64),
    Many(Vec<f64>),
}

impl Wavelengths {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Wavelengths::One(v) => vec![*v],
            Wavelengths::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Separation between transmitter and receivers.
    D,
    Lambda,
    /// Characteristic transmitter size over separation.
    Beta,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: SweepScale,
    /// Direction along which receivers move for `d`/`beta` sweeps. Defaults
    /// to the line from the transmitter origin to the first receiver origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 3]>,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                match self.scale {
                    SweepScale::Linear => self.start + (self.stop - self.start) * t,
                    SweepScale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Which shadow evaluation to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowChoice {
    /// Closed form when the geometry admits one, quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
    Analytic,
}

fn default_ppw() -> f64 {
    DEFAULT_POINTS_PER_WAVELENGTH
}

fn default_cap() -> usize {
    DEFAULT_MAX_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub transmitter: RegionSpec,
    pub receiver: Receivers,
    #[serde(default)]
    pub receiver_mode: ReceiverMode,
    /// Receiver parts hidden behind others; they carry current but are left
    /// out of the shadow measure.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hidden_receivers: Vec<usize>,
    /// Required unless the sweep runs over wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<Wavelengths>,
    #[serde(default = "default_ppw")]
    pub points_per_wavelength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelVariant>,
    pub metrics: Vec<Metric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default = "default_cap")]
    pub max_samples_per_side: usize,
    #[serde(default)]
    pub low_freq_correction: LowFreqCorrection,
    #[serde(default)]
    pub shadow_method: ShadowChoice,
}

fn config_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { location: location.into(), message: message.into() }
}

/// Parse and validate a scenario file holding one scenario or an array of
/// them. Errors carry the line/column and the field path.
pub fn parse_scenarios(text: &str) -> Result<Vec<ScenarioConfig>> {
    let many = text.trim_start().starts_with('[');
    let de = &mut serde_json::Deserializer::from_str(text);
    let parsed = if many {
        serde_path_to_error::deserialize::<_, Vec<ScenarioConfig>>(de)
    } else {
        serde_path_to_error::deserialize::<_, ScenarioConfig>(de).map(|c| vec![c])
    };
    let out = parsed.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let mut location = format!("line {}, column {}", inner.line(), inner.column());
        if path != "." {
            location.push_str(&format!(", at `{path}`"));
        }
        config_error(location, strip_position(&inner.to_string()))
    })?;
    let mut rest = serde_json::Deserializer::from_str(text).into_iter::<serde_json::Value>();
    rest.next();
    if rest.next().is_some() {
        return Err(config_error("document", "trailing content after the scenario"));
    }
    if out.is_empty() {
        return Err(config_error("document", "no scenarios given"));
    }
    for (i, cfg) in out.iter().enumerate() {
        let prefix = if many { format!("[{i}].") } else { String::new() };
        cfg.validate().map_err(|e| match e {
            Error::Config { location, message } => config_error(format!("{prefix}{location}"), message),
            other => config_error(format!("{prefix}{}", cfg.name), other.to_string()),
        })?;
    }
    let mut names: Vec<&str> = out.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(config_error("document", format!("duplicate scenario name `{}`", w[0])));
    }
    Ok(out)
}

/// The location is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config_error("name", "must not be empty"));
        }
        if !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
            return Err(config_error("name", "may only contain ASCII letters, digits, `_`, `-` and `.`"));
        }
        if self.metrics.is_empty() {
            return Err(config_error("metrics", "at least one metric is required"));
        }
        if !(positive(self.points_per_wavelength) && self.points_per_wavelength >= 2.0) {
            return Err(config_error("points_per_wavelength", "must be at least 2"));
        }
        if self.max_samples_per_side == 0 {
            return Err(config_error("max_samples_per_side", "must be positive"));
        }
        let parts = self.receiver.parts();
        if parts.is_empty() {
            return Err(config_error("receiver", "at least one receiver is required"));
        }
        let dim = self.transmitter.ambient_dim();
        for (i, r) in parts.iter().enumerate() {
            if r.ambient_dim() != dim {
                return Err(config_error(
                    format!("receiver[{i}]"),
                    format!("lives in {}D but the transmitter lives in {dim}D", r.ambient_dim()),
                ));
            }
        }
        if parts.iter().any(|r| r.kind().manifold_dim() != parts[0].kind().manifold_dim()) {
            return Err(config_error("receiver", "all receiver parts must be curves or all surfaces"));
        }
        if self.receiver_mode == ReceiverMode::Split && parts.len() < 2 {
            return Err(config_error("receiver_mode", "split mode needs at least two receivers"));
        }
        for &h in &self.hidden_receivers {
            if h >= parts.len() {
                return Err(config_error("hidden_receivers", format!("index {h} out of range")));
            }
        }
        if (0..parts.len()).all(|i| self.hidden_receivers.contains(&i)) {
            return Err(config_error("hidden_receivers", "at least one receiver must be visible"));
        }
        if let Some(k) = self.kernel {
            if k.ambient_dim() != dim {
                return Err(config_error("kernel", format!("{k:?} does not match {dim}D regions")));
            }
        }
        let lambda_sweep = matches!(&self.sweep, Some(s) if s.axis == SweepAxis::Lambda);
        match (&self.wavelength, lambda_sweep) {
            (Some(_), true) => {
                return Err(config_error("wavelength", "must be omitted when the sweep runs over wavelength"))
            }
            (None, false) => return Err(config_error("wavelength", "missing")),
            (Some(w), false) => {
                let v = w.values();
                if v.is_empty() {
                    return Err(config_error("wavelength", "empty list"));
                }
                if let Some(bad) = v.iter().find(|x| !positive(**x)) {
                    return Err(config_error("wavelength", format!("must be positive, got {bad}")));
                }
            }
            (None, true) => {}
        }
        if let Some(s) = &self.sweep {
            if !(s.start.is_finite() && s.stop.is_finite()) {
                return Err(config_error("sweep", "range must be finite"));
            }
            if s.count < 2 || s.count > MAX_POINTS {
                return Err(config_error("sweep.count", format!("must be between 2 and {MAX_POINTS}")));
            }
            if !(s.start < s.stop) {
                return Err(config_error("sweep", format!("range must increase, got {} to {}", s.start, s.stop)));
            }
            if s.start <= 0.0 {
                return Err(config_error("sweep.start", "must be positive"));
            }
            if let Some(d) = s.direction {
                if !Vec3(d).is_finite() || Vec3(d).norm() == 0.0 {
                    return Err(config_error("sweep.direction", "must be a nonzero finite vector"));
                }
            }
            if matches!(s.axis, SweepAxis::D | SweepAxis::Beta) {
                self.sweep_direction().map_err(|e| config_error("sweep.direction", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn kernel_variant(&self) -> KernelVariant {
        self.kernel.unwrap_or_else(|| KernelVariant::default_for_dim(self.transmitter.ambient_dim()))
    }

    fn sweep_direction(&self) -> Result<Vec3> {
        if let Some(d) = self.sweep.as_ref().and_then(|s| s.direction) {
            return Ok(Vec3(d).normalized());
        }
        let v = self.receiver.parts()[0].pose().origin - self.transmitter.pose().origin;
        if v.norm() == 0.0 {
            return Err(invalid("receiver and transmitter share an origin; give a sweep direction"));
        }
        Ok(v.normalized())
    }

    /// Separation of the first receiver from the transmitter along the sweep
    /// direction (or along the line between their origins).
    pub fn separation(&self) -> Option<f64> {
        let v = self.receiver.parts()[0].pose().origin - self.transmitter.pose().origin;
        match self.sweep_direction() {
            Ok(u) => Some(v.dot(u)),
            Err(_) => None,
        }
    }

    /// Every (wavelength, geometry) combination of the scenario.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let base_d = self.separation();
        let wavelengths = self.wavelength.as_ref().map(Wavelengths::values).unwrap_or_default();
        let mut out = Vec::new();
        match &self.sweep {
            None => {
                for &lambda in &wavelengths {
                    out.push(SweepPoint { wavelength: lambda, d: base_d, receivers: self.receiver.parts().to_vec() });
                }
            }
            Some(s) if s.axis == SweepAxis::Lambda => {
                for lambda in s.values() {
                    out.push(SweepPoint { wavelength: lambda, d: base_d, receivers: self.receiver.parts().to_vec() });
                }
            }
            Some(s) => {
                let u = self.sweep_direction()?;
                let d0 = base_d.unwrap_or(0.0);
                let size = characteristic_size(&self.transmitter);
                for &lambda in &wavelengths {
                    for v in s.values() {
                        let d = if s.axis == SweepAxis::Beta { size / v } else { v };
                        let shift = u * (d - d0);
                        let receivers = self
                            .receiver
                            .parts()
                            .iter()
                            .map(|r| r.moved(&Rotation::IDENTITY, shift))
                            .collect::<Result<Vec<_>>>()?;
                        out.push(SweepPoint { wavelength: lambda, d: Some(d), receivers });
                    }
                }
            }
        }
        Ok(out)
    }

    fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }
}

/// Size used to define `β = size/d`: segment and polyline lengths, disc and
/// arc radii, rectangle widths.
pub fn characteristic_size(spec: &RegionSpec) -> f64 {
    match spec.shape() {
        Shape::Segment2d { length } | Shape::Segment3d { length } => *length,
        Shape::Arc2d { radius, .. } | Shape::Disc3d { radius } => *radius,
        Shape::Rectangle3d { width, .. } => *width,
        Shape::Polyline2d { .. } => spec.measure(),
    }
}

/// Resolved geometry of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub wavelength: f64,
    pub d: Option<f64>,
    pub receivers: Vec<RegionSpec>,
}

/// Parameters a record was computed with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub wavelength: f64,
    pub d: Option<f64>,
    pub beta: Option<f64>,
    pub points_per_wavelength: f64,
    pub kernel: KernelVariant,
    pub pair_class: PairClass,
    pub samples_tx: usize,
    pub samples_rx: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub sampling_s: f64,
    pub spectrum_s: f64,
    pub geometry_s: f64,
}

/// Per-record estimator values; fields not requested or not defined for the
/// geometry are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordMetrics {
    pub n_e: Option<f64>,
    pub n_r: Option<f64>,
    pub n_c: Option<usize>,
    pub n_c_low_confidence: Option<bool>,
    pub n_h: Option<usize>,
    pub n_a: Option<f64>,
    /// `A_TR` (m²) or `L_TR` (m).
    pub shadow_measure: Option<f64>,
    pub ne0: Option<f64>,
    pub coupling_strength: Option<f64>,
    pub avg_level: Option<f64>,
    pub bounds: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub scenario: String,
    pub index: usize,
    pub params: ResolvedParams,
    pub spectrum: Option<Spectrum>,
    pub metrics: RecordMetrics,
    pub timing: Timing,
}

impl RunRecord {
    /// Recompute the purely spectral fields from the stored spectrum.
    pub fn recompute_spectral(&self) -> Result<Option<NdofReport>> {
        self.spectrum.as_ref().map(NdofReport::from_spectrum).transpose()
    }
}

fn with_context(scenario: &str, e: Error) -> Error {
    match e {
        Error::Scenario { .. } => e,
        e => Error::Scenario { scenario: scenario.to_string(), source: Box::new(e) },
    }
}

/// Run every point of a scenario; points are independent and run in
/// parallel, records come back in sweep order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<RunRecord>> {
    cfg.validate().map_err(|e| with_context(&cfg.name, e))?;
    let points = cfg.points().map_err(|e| with_context(&cfg.name, e))?;
    // Check every point's size before doing any work.
    for p in &points {
        check_size(cfg, p).map_err(|e| with_context(&cfg.name, e))?;
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_point(cfg, i, p).map_err(|e| with_context(&cfg.name, e)))
        .collect()
}

fn check_size(cfg: &ScenarioConfig, p: &SweepPoint) -> Result<()> {
    let cap = cfg.max_samples_per_side;
    let nt = estimate_samples(&cfg.transmitter, p.wavelength, cfg.points_per_wavelength)?;
    if nt > cap {
        return Err(Error::TooLarge { estimated: nt, cap });
    }
    let mut nr = 0;
    for r in &p.receivers {
        nr += estimate_samples(r, p.wavelength, cfg.points_per_wavelength)?;
    }
    if nr > cap {
        return Err(Error::TooLarge { estimated: nr, cap });
    }
    Ok(())
}

/// Evaluate a single resolved point.
pub fn run_point(cfg: &ScenarioConfig, index: usize, p: &SweepPoint) -> Result<RunRecord> {
    let lambda = p.wavelength;
    let ppw = cfg.points_per_wavelength;
    let clock = Instant::now();
    let t = sample_region(&cfg.transmitter, lambda, ppw)?;
    let parts = p.receivers.iter().map(|r| sample_region(r, lambda, ppw)).collect::<Result<Vec<_>>>()?;
    let joint = SampledRegion::union(&parts)?;
    let class = PairClass::of(&t, &joint);
    let kernel = Kernel::from_wavelength(cfg.kernel_variant(), lambda)?;
    let mut timing = Timing { sampling_s: clock.elapsed().as_secs_f64(), ..Timing::default() };

    let clock = Instant::now();
    let spectrum = if cfg.metrics.iter().any(|m| m.needs_spectrum()) {
        Some(match cfg.receiver_mode {
            ReceiverMode::Joint => channel_spectrum(&t, &joint, &kernel)?,
            ReceiverMode::Split => {
                let spectra = parts.iter().map(|r| channel_spectrum(&t, r, &kernel)).collect::<Result<Vec<_>>>()?;
                merge_spectra(&spectra)?
            }
        })
    } else {
        None
    };
    timing.spectrum_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut m = RecordMetrics::default();
    if let Some(s) = &spectrum {
        let r = NdofReport::from_spectrum(s)?;
        if cfg.wants(Metric::Ne) {
            m.n_e = Some(r.n_e);
        }
        if cfg.wants(Metric::Nr) {
            m.n_r = Some(r.n_r);
        }
        if cfg.wants(Metric::Nc) {
            m.n_c = r.n_c;
            m.n_c_low_confidence = Some(r.n_c_low_confidence);
        }
        if cfg.wants(Metric::Nh) {
            m.n_h = r.n_h;
        }
        if cfg.wants(Metric::CouplingStrength) {
            m.coupling_strength = Some(r.coupling_strength);
        }
    }

    let visible: Vec<usize> = (0..parts.len()).filter(|i| !cfg.hidden_receivers.contains(i)).collect();
    if cfg.wants(Metric::Na) || cfg.wants(Metric::AvgLevel) {
        let measure = shadow_total(cfg, &cfg.transmitter, &t, p, &parts, &visible)?;
        let dim = if t.manifold_dim() == 1 { 2 } else { 3 };
        let plain = shadow_ndof(measure, lambda, dim, LowFreqCorrection::None)?;
        if cfg.wants(Metric::Na) {
            m.n_a = Some(shadow_ndof(measure, lambda, dim, cfg.low_freq_correction)?);
            m.shadow_measure = Some(measure);
        }
        if cfg.wants(Metric::AvgLevel) && class.has_area_eigenvalues() && plain > 0.0 {
            if let Some(s) = &spectrum {
                m.avg_level = Some((4.0 * PI / lambda).powi(2) * s.sum() / plain);
            }
        }
    }
    if cfg.wants(Metric::Ne0) && p.receivers.len() == 1 {
        m.ne0 = ne0_for(&cfg.transmitter, &p.receivers[0], lambda)?;
    }
    if cfg.wants(Metric::Bounds) && class.has_area_eigenvalues() {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &i in &visible {
            let (a, b) = eig_level_bounds(&t, &parts[i])?;
            lo = lo.min(a);
            hi = hi.max(b);
        }
        m.bounds = Some((lo, hi));
    }
    timing.geometry_s = clock.elapsed().as_secs_f64();

    let beta = p.d.filter(|d| *d > 0.0).map(|d| characteristic_size(&cfg.transmitter) / d);
    Ok(RunRecord {
        scenario: cfg.name.clone(),
        index,
        params: ResolvedParams {
            wavelength: lambda,
            d: p.d,
            beta,
            points_per_wavelength: ppw,
            kernel: cfg.kernel_variant(),
            pair_class: class,
            samples_tx: t.len(),
            samples_rx: joint.len(),
        },
        spectrum,
        metrics: m,
        timing,
    })
}

/// Sum of the shadow measures between the transmitter and each visible part.
fn shadow_total(
    cfg: &ScenarioConfig,
    tx: &RegionSpec,
    t: &SampledRegion,
    p: &SweepPoint,
    parts: &[SampledRegion],
    visible: &[usize],
) -> Result<f64> {
    let mut total = 0.0;
    for &i in visible {
        let analytic = analytic_shadow(tx, &p.receivers[i]);
        total += match (cfg.shadow_method, analytic) {
            (ShadowChoice::Analytic, None) => {
                return Err(Error::UnsupportedConfiguration(format!(
                    "no closed-form shadow measure for receiver {i}; use `quadrature`"
                )))
            }
            (ShadowChoice::Analytic | ShadowChoice::Auto, Some(v)) => v,
            _ => shadow_measure(t, &parts[i])?,
        };
    }
    Ok(total)
}

/// Relative tolerance for recognising special placements.
const PLACEMENT_TOL: f64 = 1e-9;

/// Separation of two parallel planar regions whose centres lie on a common
/// normal, or `None`.
fn coaxial_separation(t: &RegionSpec, r: &RegionSpec) -> Option<f64> {
    let (nt, nr) = (t.plane_normal()?, r.plane_normal()?);
    if (nt.dot(nr).abs() - 1.0).abs() > PLACEMENT_TOL {
        return None;
    }
    let offset = r.pose().origin - t.pose().origin;
    let d = offset.dot(nt).abs();
    let lateral = (offset - nt * offset.dot(nt)).norm();
    (d > 0.0 && lateral <= PLACEMENT_TOL * d).then_some(d)
}

/// Equal parallel segments facing each other across their common normal.
fn facing_lines(t: &RegionSpec, r: &RegionSpec) -> Option<(f64, f64)> {
    let (lt, lr) = match (t.shape(), r.shape()) {
        (Shape::Segment2d { length: a }, Shape::Segment2d { length: b })
        | (Shape::Segment3d { length: a }, Shape::Segment3d { length: b }) => (*a, *b),
        _ => return None,
    };
    if (lt - lr).abs() > PLACEMENT_TOL * lt {
        return None;
    }
    // Both lines must run along the same axis.
    if (t.pose().frame[0].dot(r.pose().frame[0]).abs() - 1.0).abs() > PLACEMENT_TOL {
        return None;
    }
    let offset = r.pose().origin - t.pose().origin;
    let along = offset.dot(t.pose().frame[0]);
    let d = (offset - t.pose().frame[0] * along).norm();
    (d > 0.0 && along.abs() <= PLACEMENT_TOL * d).then_some((lt, d))
}

fn analytic_shadow(t: &RegionSpec, r: &RegionSpec) -> Option<f64> {
    match (t.shape(), r.shape()) {
        (Shape::Disc3d { radius: a }, Shape::Disc3d { radius: b }) => {
            coaxial_separation(t, r).map(|d| shadow_two_discs(*a, *b, d))
        }
        _ => {
            let (l, d) = facing_lines(t, r)?;
            // For 3D lines the formula assumes the common normal lies in the
            // plane of the stored normals.
            if t.kind() == RegionKind::Segment3d {
                let n = t.pose().frame[1];
                let offset = (r.pose().origin - t.pose().origin).normalized();
                if (n.dot(offset).abs() - 1.0).abs() > PLACEMENT_TOL {
                    return None;
                }
            }
            // `shadow_length_two_lines` returns L/λ; ask for λ = 1.
            shadow_length_two_lines(l, d, 1.0).ok()
        }
    }
}

/// Closed-form asymptotic `N_e`, when the geometry is one of the canonical ones.
fn ne0_for(t: &RegionSpec, r: &RegionSpec, lambda: f64) -> Result<Option<f64>> {
    if let Some((l, d)) = facing_lines(t, r) {
        return match t.kind() {
            RegionKind::Segment3d => ne0_lines_3d(l, d, lambda).map(Some),
            _ => ne0_lines_2d(l, d, lambda).map(Some),
        };
    }
    if t.kind().manifold_dim() == 2 && r.kind().manifold_dim() == 2 && t.ambient_dim() == 3 {
        let (Some(nt), Some(nr)) = (t.plane_normal(), r.plane_normal()) else { return Ok(None) };
        if (nt.dot(nr).abs() - 1.0).abs() > PLACEMENT_TOL {
            return Ok(None);
        }
        let d = (r.pose().origin - t.pose().origin).dot(nt).abs();
        if d > 0.0 {
            return ne0_planar(t, r, d, lambda).map(Some);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;

    fn lines(d: f64) -> ScenarioConfig {
        ScenarioConfig {
            name: "lines".into(),
            description: String::new(),
            transmitter: RegionSpec::segment3d(1.0, Pose::IDENTITY).unwrap(),
            receiver: Receivers::One(RegionSpec::segment3d(1.0, Pose::translation(Vec3::new(0.0, d, 0.0))).unwrap()),
            receiver_mode: ReceiverMode::Joint,
            hidden_receivers: vec![],
            wavelength: Some(Wavelengths::One(0.05)),
            points_per_wavelength: 5.0,
            kernel: None,
            metrics: Metric::ALL.to_vec(),
            sweep: None,
            output: None,
            max_samples_per_side: DEFAULT_MAX_SAMPLES,
            low_freq_correction: LowFreqCorrection::None,
            shadow_method: ShadowChoice::Auto,
        }
    }

    #[test]
    fn sweep_values() {
        let s = Sweep { axis: SweepAxis::D, start: 0.1, stop: 3.2, count: 6, scale: SweepScale::Log, direction: None };
        let v = s.values();
        for (a, b) in v.iter().zip([0.1, 0.2, 0.4, 0.8, 1.6, 3.2]) {
            assert!((a - b).abs() < 1e-12 * b, "{a} vs {b}");
        }
        let s = Sweep { scale: SweepScale::Linear, start: 1.0, stop: 2.0, count: 3, ..s };
        assert_eq!(s.values(), vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn d_sweep_moves_receivers() {
        let mut cfg = lines(1.0);
        cfg.sweep = Some(Sweep { axis: SweepAxis::D, start: 0.5, stop: 2.0, count: 4, scale: SweepScale::Linear, direction: None });
        let pts = cfg.points().unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            let d = p.d.unwrap();
            assert!((p.receivers[0].pose().origin.y() - d).abs() < 1e-12);
        }
        cfg.sweep.as_mut().unwrap().axis = SweepAxis::Beta;
        let pts = cfg.points().unwrap();
        assert!((pts[0].d.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lines_record_is_complete() {
        let rec = run_scenario(&lines(1.0)).unwrap().remove(0);
        let m = &rec.metrics;
        assert!(m.n_r.unwrap() >= m.n_e.unwrap());
        assert!(m.ne0.is_some());
        // Analytic shadow for facing lines: (2ℓ/λ)(√2 − 1).
        let want = 2.0 * (2f64.sqrt() - 1.0) / 0.05;
        assert!((m.n_a.unwrap() - want).abs() < 1e-9 * want);
        // Curves in 3D have no area normalization.
        assert!(m.avg_level.is_none() && m.bounds.is_none() && m.n_h.is_none());
        let again = rec.recompute_spectral().unwrap().unwrap();
        assert_eq!(again.n_e, m.n_e.unwrap());
    }

    #[test]
    fn quadrature_and_analytic_agree_for_lines() {
        let mut cfg = lines(1.0);
        cfg.metrics = vec![Metric::Na];
        let a = run_scenario(&cfg).unwrap()[0].metrics.n_a.unwrap();
        cfg.shadow_method = ShadowChoice::Quadrature;
        let q = run_scenario(&cfg).unwrap()[0].metrics.n_a.unwrap();
        assert!((a - q).abs() < 1e-3 * a, "{a} vs {q}");
        assert!(run_scenario(&cfg).unwrap()[0].spectrum.is_none());
    }

    #[test]
    fn analytic_requires_closed_form() {
        let mut cfg = lines(1.0);
        cfg.receiver = Receivers::One(RegionSpec::segment3d(2.0, Pose::translation(Vec3::new(0.0, 1.0, 0.0))).unwrap());
        cfg.metrics = vec![Metric::Na];
        cfg.shadow_method = ShadowChoice::Analytic;
        let err = run_scenario(&cfg).unwrap_err();
        assert!(err.is_config_error(), "{err}");
    }

    #[test]
    fn size_cap_is_enforced() {
        let mut cfg = lines(1.0);
        cfg.max_samples_per_side = 50;
        let err = run_scenario(&cfg).unwrap_err();
        assert!(err.to_string().contains("cap of 50"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = lines(1.0);
        cfg.metrics.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = lines(1.0);
        cfg.sweep = Some(Sweep { axis: SweepAxis::D, start: 2.0, stop: 1.0, count: 3, scale: SweepScale::Linear, direction: None });
        assert!(cfg.validate().is_err());
        let mut cfg = lines(1.0);
        cfg.wavelength = Some(Wavelengths::Many(vec![0.1, -0.1]));
        assert!(cfg.validate().is_err());
        let mut cfg = lines(1.0);
        cfg.sweep = Some(Sweep { axis: SweepAxis::Lambda, start: 0.1, stop: 1.0, count: 3, scale: SweepScale::Log, direction: None });
        assert!(cfg.validate().is_err(), "wavelength and a wavelength sweep conflict");
        cfg.wavelength = None;
        assert!(cfg.validate().is_ok());
        let mut cfg = lines(1.0);
        cfg.receiver_mode = ReceiverMode::Split;
        assert!(cfg.validate().is_err());
        let mut cfg = lines(1.0);
        cfg.hidden_receivers = vec![0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_scenarios("{\"name\": \"x\",\n \"transmitter\": 3").unwrap_err();
        match err {
            Error::Config { location, .. } => assert!(location.starts_with("line 2"), "{location}"),
            e => panic!("{e}"),
        }
        let text = r#"{"name": "x", "transmitter": {"kind": "segment2d", "length": 1},
            "receiver": {"kind": "segment2d", "length": "long", "origin": [0, 1]},
            "wavelength": 0.1, "metrics": ["n_e"]}"#;
        match parse_scenarios(text).unwrap_err() {
            Error::Config { location, .. } => {
                assert!(location.contains("receiver"), "{location}");
                assert!(location.starts_with("line 2"), "{location}");
            }
            e => panic!("{e}"),
        }
        let text = r#"[{"name": "x", "transmitter": {"kind": "segment2d", "length": 1},
            "receiver": {"kind": "segment2d", "length": 1, "origin": [0, 1]},
            "wavelength": 0.1, "metrics": ["n_e"], "colour": 1}]"#;
        match parse_scenarios(text).unwrap_err() {
            Error::Config { location, message } => {
                assert!(location.contains("[0]"), "{location}");
                assert!(message.contains("colour"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut cfg = lines(1.0);
        cfg.sweep = Some(Sweep { axis: SweepAxis::D, start: 0.5, stop: 2.0, count: 4, scale: SweepScale::Log, direction: None });
        let text = serde_json::to_string(&cfg).unwrap();
        let back = parse_scenarios(&text).unwrap();
        assert_eq!(back, vec![cfg]);
    }
}
