//! `ndof`: run scenario files or built-in scenarios and write spectra and
//! NDoF reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ndof_core::builtins::{self, BUILTINS};
use ndof_core::output::{emit_report_json, emit_spectrum_csv};
use ndof_core::scenario::{parse_scenarios, run_scenario, OutputFormat, RunRecord, ScenarioConfig};
use ndof_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Both => OutputFormat::Both,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ndof", version, about = "Spatial degrees of freedom of scalar near-field channels")]
struct Args {
    /// Scenario file (JSON) or the name of a built-in scenario.
    #[arg(long, required_unless_present = "list_builtins")]
    scenario: Option<String>,

    /// Where spectra and the report go. Overrides the scenario's own setting.
    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Overrides the scenario's output format.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Overrides the sampling density of every scenario.
    #[arg(long)]
    points_per_wavelength: Option<f64>,

    /// Print the built-in scenarios and exit.
    #[arg(long)]
    list_builtins: bool,

    /// Keep at most this many eigenvalues per CSV file. Metrics always use
    /// the full spectrum.
    #[arg(long)]
    max_modes: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_builtins {
        for b in BUILTINS {
            println!("{:<20} {:<7} {}", b.name, b.figure, b.summary);
        }
        return ExitCode::SUCCESS;
    }
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_CONFIG,
        e if e.is_config_error() => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn load(arg: &str) -> Result<Vec<ScenarioConfig>, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        return parse_scenarios(&text).map_err(|e| match e {
            Error::Config { location, message } => Error::Config { location: format!("{arg}: {location}"), message },
            e => e,
        });
    }
    match builtins::find(arg) {
        Some(b) => b.configs(),
        None => Err(Error::Config {
            location: "--scenario".into(),
            message: format!("`{arg}` is neither a readable file nor a built-in scenario (see --list-builtins)"),
        }),
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let scenario = args.scenario.as_deref().expect("clap enforces --scenario");
    let mut configs = load(scenario)?;
    if let Some(ppw) = args.points_per_wavelength {
        for c in &mut configs {
            c.points_per_wavelength = ppw;
            c.validate()?;
        }
    }
    if args.max_modes == Some(0) {
        return Err(Error::Config { location: "--max-modes".into(), message: "must be positive".into() });
    }

    // Records are grouped by destination so that each directory gets one
    // report written by a single writer.
    let mut groups: BTreeMap<(PathBuf, OutputFormat), Vec<RunRecord>> = BTreeMap::new();
    for cfg in &configs {
        let dir = args
            .output_dir
            .clone()
            .or_else(|| cfg.output.as_ref().and_then(|o| o.directory.clone()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let format: OutputFormat =
            args.format.map(Into::into).or_else(|| cfg.output.as_ref().map(|o| o.format)).unwrap_or_default();
        let points = cfg.points()?.len();
        eprintln!("running {} ({points} point{})", cfg.name, if points == 1 { "" } else { "s" });
        let records = run_scenario(cfg)?;
        for r in &records {
            eprintln!("  {}", summary(r));
        }
        groups.entry((dir, format)).or_default().extend(records);
    }

    for ((dir, format), records) in &groups {
        fs::create_dir_all(dir)?;
        if format.csv() {
            for r in records {
                emit_spectrum_csv(r, dir, args.max_modes)?;
            }
        }
        if format.json() {
            let path = dir.join("report.json");
            emit_report_json(records, &path, format.csv())?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn summary(r: &RunRecord) -> String {
    let mut s = format!("#{} λ={:.4e}", r.index, r.params.wavelength);
    if let Some(d) = r.params.d {
        s.push_str(&format!(" d={d:.4}"));
    }
    let m = &r.metrics;
    let fields = [("N_e", m.n_e), ("N_r", m.n_r), ("N_a", m.n_a), ("N_e0", m.ne0), ("avg", m.avg_level)];
    for (name, v) in fields {
        if let Some(v) = v {
            s.push_str(&format!(" {name}={v:.2}"));
        }
    }
    if let Some(c) = m.n_c {
        s.push_str(&format!(" N_c={c}"));
    }
    s
}
