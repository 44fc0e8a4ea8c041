//! The fuzz corpus seeds must stay valid inputs, otherwise the fuzzers start
//! from nothing useful.

use std::fs;
use std::path::{Path, PathBuf};

use ndof_core::output::{parse_report, parse_spectrum_csv};
use ndof_core::scenario::parse_scenarios;
use ndof_core::RegionSpec;

fn seeds(target: &str) -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files
}

#[test]
fn scenario_seeds_parse() {
    for f in seeds("scenario") {
        parse_scenarios(&fs::read_to_string(&f).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

#[test]
fn csv_seeds_parse() {
    for f in seeds("spectrum_csv") {
        parse_spectrum_csv(&fs::read_to_string(&f).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

#[test]
fn report_seeds_parse() {
    for f in seeds("report") {
        parse_report(&fs::read_to_string(&f).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

#[test]
fn region_seeds_parse() {
    for f in seeds("region") {
        serde_json::from_str::<RegionSpec>(&fs::read_to_string(&f).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}
