//! CSV spectra and JSON reports.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{PairClass, Spectrum};
use crate::error::{Error, Result};
use crate::greens::KernelVariant;
use crate::metrics::power_law_fit;
use crate::scenario::RunRecord;

pub const SCHEMA_VERSION: u32 = 1;

/// Estimates below this are too close to the low-frequency regime to enter
/// a power-law fit.
pub const FIT_MIN_NDOF: f64 = 10.0;

/// Tolerance of the write-time `n_r ≥ n_e` check.
const JENSEN_SLACK: f64 = 1e-9;

pub const CSV_HEADER: &str = "n,zeta,zeta_normalized";

/// `(4π)²ζ/λ²` for surface pairs in 3D and curve pairs in 2D, `ζ/Σζ`
/// otherwise. Same scale as [`Spectrum::normalized`].
pub fn normalization(s: &Spectrum) -> f64 {
    if s.class().has_area_eigenvalues() {
        (4.0 * PI / s.wavelength()).powi(2)
    } else if s.sum() > 0.0 {
        1.0 / s.sum()
    } else {
        0.0
    }
}

/// CSV text of a spectrum: one row per retained eigenvalue, at most
/// `max_modes` rows. Merged spectra get a fourth `source` column.
pub fn spectrum_csv(s: &Spectrum, max_modes: Option<usize>) -> String {
    let scale = normalization(s);
    let keep = s.retained().len().min(max_modes.unwrap_or(usize::MAX));
    let mut out = String::with_capacity(48 * (keep + 1));
    out.push_str(CSV_HEADER);
    let sources = s.sources();
    if sources.is_some() {
        out.push_str(",source");
    }
    out.push('\n');
    for (i, &z) in s.values()[..keep].iter().enumerate() {
        let _ = write!(out, "{},{:e},{:e}", i + 1, z, z * scale);
        if let Some(src) = sources {
            let _ = write!(out, ",{}", src[i]);
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsvRow {
    pub n: usize,
    pub zeta: f64,
    pub zeta_normalized: f64,
    pub source: Option<usize>,
}

fn csv_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config { location: format!("csv line {line}"), message: message.into() }
}

/// Parse the output of [`spectrum_csv`].
pub fn parse_spectrum_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| csv_error(1, "empty file"))?;
    let with_source = match header.trim_end() {
        h if h == CSV_HEADER => false,
        h if h.strip_prefix(CSV_HEADER) == Some(",source") => true,
        h => return Err(csv_error(1, format!("unexpected header `{h}`"))),
    };
    let width = if with_source { 4 } else { 3 };
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != width {
            return Err(csv_error(lineno, format!("expected {width} fields, got {}", fields.len())));
        }
        let n: usize = fields[0].parse().map_err(|_| csv_error(lineno, format!("bad index `{}`", fields[0])))?;
        if n != rows.len() + 1 {
            return Err(csv_error(lineno, format!("index {n} out of sequence")));
        }
        let num = |f: &str| -> Result<f64> {
            let v: f64 = f.parse().map_err(|_| csv_error(lineno, format!("bad number `{f}`")))?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(csv_error(lineno, format!("value `{f}` must be finite and nonnegative")))
            }
        };
        let source = if with_source {
            Some(fields[3].parse().map_err(|_| csv_error(lineno, format!("bad source `{}`", fields[3])))?)
        } else {
            None
        };
        rows.push(CsvRow { n, zeta: num(fields[1])?, zeta_normalized: num(fields[2])?, source });
    }
    Ok(rows)
}

/// File name of a record's spectrum.
pub fn spectrum_file_name(record: &RunRecord) -> String {
    format!("{}_{:03}.csv", record.scenario, record.index)
}

/// Write the record's spectrum into `dir`; returns the path, or `None` when
/// the record carries no spectrum.
pub fn emit_spectrum_csv(record: &RunRecord, dir: &Path, max_modes: Option<usize>) -> Result<Option<PathBuf>> {
    let Some(s) = &record.spectrum else { return Ok(None) };
    let path = dir.join(spectrum_file_name(record));
    fs::write(&path, spectrum_csv(s, max_modes))?;
    Ok(Some(path))
}

/// One record of the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub scenario: String,
    pub index: usize,
    pub lambda: f64,
    pub d: Option<f64>,
    pub beta: Option<f64>,
    pub n_e: Option<f64>,
    pub n_r: Option<f64>,
    pub n_c: Option<usize>,
    pub n_c_low_confidence: Option<bool>,
    pub n_h: Option<usize>,
    pub n_a: Option<f64>,
    pub shadow_measure: Option<f64>,
    pub ne0: Option<f64>,
    pub coupling_strength: Option<f64>,
    pub avg_level: Option<f64>,
    /// `[lower, upper]`; an infinite upper bound is written as `null`.
    pub bounds: Option<(f64, Option<f64>)>,
    pub points_per_wavelength: f64,
    pub kernel: KernelVariant,
    pub pair_class: PairClass,
    pub samples_tx: usize,
    pub samples_rx: usize,
    pub spectrum_len: Option<usize>,
    pub spectrum_file: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawFit {
    pub scenario: String,
    pub metric: String,
    /// Exponent in `N ≈ α/λ^p`.
    pub p: u32,
    pub alpha: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingEntry {
    pub scenario: String,
    pub index: usize,
    pub sampling_s: f64,
    pub spectrum_s: f64,
    pub geometry_s: f64,
}

/// The JSON document. Timing sits in its own section so that everything
/// else is reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub records: Vec<ReportRecord>,
    pub fits: Vec<PowerLawFit>,
    pub timing: Vec<TimingEntry>,
}

impl ReportRecord {
    pub fn from_record(r: &RunRecord, with_csv: bool) -> Self {
        let m = &r.metrics;
        ReportRecord {
            scenario: r.scenario.clone(),
            index: r.index,
            lambda: r.params.wavelength,
            d: r.params.d,
            beta: r.params.beta,
            n_e: m.n_e,
            n_r: m.n_r,
            n_c: m.n_c,
            n_c_low_confidence: m.n_c_low_confidence,
            n_h: m.n_h,
            n_a: m.n_a,
            shadow_measure: m.shadow_measure,
            ne0: m.ne0,
            coupling_strength: m.coupling_strength,
            avg_level: m.avg_level,
            bounds: m.bounds.map(|(lo, hi)| (lo, hi.is_finite().then_some(hi))),
            points_per_wavelength: r.params.points_per_wavelength,
            kernel: r.params.kernel,
            pair_class: r.params.pair_class,
            samples_tx: r.params.samples_tx,
            samples_rx: r.params.samples_rx,
            spectrum_len: r.spectrum.as_ref().map(|s| s.retained().len()),
            spectrum_file: r.spectrum.as_ref().filter(|_| with_csv).map(|_| spectrum_file_name(r)),
        }
    }

    fn check(&self) -> Result<()> {
        let finite = [
            ("lambda", Some(self.lambda)),
            ("d", self.d),
            ("beta", self.beta),
            ("n_e", self.n_e),
            ("n_r", self.n_r),
            ("n_a", self.n_a),
            ("shadow_measure", self.shadow_measure),
            ("ne0", self.ne0),
            ("coupling_strength", self.coupling_strength),
            ("avg_level", self.avg_level),
            ("bounds", self.bounds.map(|b| b.0)),
            ("bounds", self.bounds.and_then(|b| b.1)),
        ];
        for (name, v) in finite {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::NumericalFailure(format!(
                        "{} record {}: `{name}` is not finite",
                        self.scenario, self.index
                    )));
                }
            }
        }
        if let (Some(ne), Some(nr)) = (self.n_e, self.n_r) {
            if nr < ne * (1.0 - JENSEN_SLACK) {
                return Err(Error::NumericalFailure(format!(
                    "{} record {}: effective rank {nr} below effective NDoF {ne}",
                    self.scenario, self.index
                )));
            }
        }
        Ok(())
    }
}

/// Fit `α/λ^p` to every estimator of every scenario that was evaluated at
/// three or more wavelengths with the rest of the geometry fixed.
pub fn power_law_fits(records: &[RunRecord]) -> Vec<PowerLawFit> {
    let mut out = Vec::new();
    let mut groups: Vec<(&str, Option<u64>, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = r.params.d.map(f64::to_bits);
        match groups.iter_mut().find(|g| g.0 == r.scenario && g.1 == key) {
            Some(g) => g.2.push(r),
            None => groups.push((&r.scenario, key, vec![r])),
        }
    }
    for (scenario, _, rs) in groups {
        let mut lambdas: Vec<u64> = rs.iter().map(|r| r.params.wavelength.to_bits()).collect();
        lambdas.sort_unstable();
        lambdas.dedup();
        if lambdas.len() < 3 {
            continue;
        }
        let p = if rs[0].params.pair_class == PairClass::SurfacePair3d { 2 } else { 1 };
        let getters: [(&str, fn(&RunRecord) -> Option<f64>); 5] = [
            ("n_e", |r| r.metrics.n_e),
            ("n_r", |r| r.metrics.n_r),
            ("n_c", |r| r.metrics.n_c.map(|v| v as f64)),
            ("n_h", |r| r.metrics.n_h.map(|v| v as f64)),
            ("n_a", |r| r.metrics.n_a),
        ];
        for (name, get) in getters {
            let series: Vec<(f64, f64)> = rs
                .iter()
                .filter_map(|r| get(r).map(|v| (r.params.wavelength, v)))
                .filter(|&(_, v)| v >= FIT_MIN_NDOF)
                .collect();
            if let Ok(alpha) = power_law_fit(&series, p) {
                out.push(PowerLawFit { scenario: scenario.to_string(), metric: name.into(), p, alpha, points: series.len() });
            }
        }
    }
    out
}

/// Assemble the report document; fails if any record violates the
/// finiteness or `n_r ≥ n_e` checks.
pub fn build_report(records: &[RunRecord], with_csv: bool) -> Result<Report> {
    let rows: Vec<ReportRecord> = records.iter().map(|r| ReportRecord::from_record(r, with_csv)).collect();
    for r in &rows {
        r.check()?;
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        records: rows,
        fits: power_law_fits(records),
        timing: records
            .iter()
            .map(|r| TimingEntry {
                scenario: r.scenario.clone(),
                index: r.index,
                sampling_s: r.timing.sampling_s,
                spectrum_s: r.timing.spectrum_s,
                geometry_s: r.timing.geometry_s,
            })
            .collect(),
    })
}

pub fn report_json(records: &[RunRecord], with_csv: bool) -> Result<String> {
    let report = build_report(records, with_csv)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn emit_report_json(records: &[RunRecord], path: &Path, with_csv: bool) -> Result<()> {
    fs::write(path, report_json(records, with_csv)?)?;
    Ok(())
}

/// Parse a report, checking the schema version.
pub fn parse_report(text: &str) -> Result<Report> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let report: Report = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Config { location: format!("line {}, column {}, at `{path}`", inner.line(), inner.column()), message: inner.to_string() }
    })?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::Config {
            location: "schema_version".into(),
            message: format!("unsupported schema version {}", report.schema_version),
        });
    }
    for r in &report.records {
        r.check()?;
    }
    Ok(report)
}
