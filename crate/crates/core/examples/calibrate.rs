//! Regenerates `fixtures/calibration.json`.
//!
//! ```bash
//! cargo run --release --example calibrate
//! ```
//!
//! The constants `K` of the two calibrated checks are twice the largest ratio
//! `lhs / envelope` observed on a frozen corpus. The endpoint pipeline's
//! largest `final_ratio` is recorded alongside so later runs can be compared.

use std::path::Path;

use sparselab::pipelines::{Calibration, CalibrationEntry};
use sparselab::suites::{run_suite, SuiteConfig, Target};

const TRIALS: usize = 300;
const LEVEL: u32 = 8;

fn measured_max(target: Target, seed: u64) -> f64 {
    let mut cfg = SuiteConfig::new(target, LEVEL);
    cfg.k = Some(f64::INFINITY);
    let report = run_suite(&cfg, seed, TRIALS).expect("calibration corpus runs");
    report.results.iter().map(|r| r.detail["measured"].as_f64().expect("measured ratio recorded")).fold(0.0, f64::max)
}

fn entry(target: Target, seed: u64) -> CalibrationEntry {
    let observed_max = measured_max(target, seed);
    CalibrationEntry { seed, trials: TRIALS, level: LEVEL, observed_max, k: 2.0 * observed_max }
}

fn main() {
    let prop31 = entry(Target::Prop31, 31);
    let prop32 = entry(Target::Prop32, 32);
    let thm_a = run_suite(&SuiteConfig::new(Target::ThmA, LEVEL), 5, TRIALS).expect("endpoint corpus runs");
    assert_eq!(thm_a.failed, 0, "endpoint corpus must be green before calibrating");
    let cal = Calibration { prop31, prop32, thm_a_final_ratio: thm_a.max_ratio };

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/calibration.json");
    let text = serde_json::to_string_pretty(&cal).expect("serializable") + "\n";
    std::fs::write(&path, text).expect("fixture is writable");
    println!("{}", serde_json::to_string_pretty(&cal).expect("serializable"));
    println!("wrote {}", path.display());
}
