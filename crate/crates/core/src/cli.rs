//! The `sparselab` command line.
//!
//! Exit codes: 0 success, 1 a failed assertion, 2 malformed input, 3 a bad
//! parameter. Reports go to `--out` or stdout; stderr carries diagnostics only.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{theorem_instance, trial_rng};
use crate::error::{Error, Result};
use crate::gridfn::{CellSet, GridFunction, GridFunctionJson};
use crate::lattice::Resolution;
use crate::pipelines::{extremal_search, power_sweep, write_sweep_csv, write_trajectory_csv, Objective, TheoremParams};
use crate::real::{parse_rat64, Rat64};
use crate::sparse::SparseCollectionJson;
use crate::suites::{run_suite, SuiteConfig, Target, MAX_MEMBERS};
use crate::weights::{characteristics, generate_weight, IntervalFamily, Weight, WeightKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERT: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_PARAM: i32 = 3;

/// Caps the worker threads used for concurrent trials.
pub const THREADS_ENV: &str = "SPARSELAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "sparselab", version, about = "Exact dyadic verifiers for weighted sparse bounds")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Master seed; trial i uses the stream (seed, i).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Resolution level: 3·2^L cells.
    #[arg(long = "L", global = true, default_value_t = 8)]
    pub level: u32,
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Relative tolerance for inexact comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Assert)]
    pub mode: Mode,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Assert,
    Report,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FwChoice {
    Dyadic,
    Exact,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weight characteristics with their witnesses.
    Constants {
        /// A weight JSON file, or a generator: constant, two-step, power:B,
        /// random-a1:T, doubling-random.
        weight: String,
        /// Interval family for the A_1 constant: dyadic or all.
        #[arg(long, default_value = "dyadic")]
        family: String,
        #[arg(long, value_enum, default_value_t = FwChoice::Both)]
        fw: FwChoice,
    },
    /// Run a seeded suite: kolmogorov, magic, nweak, carleson, prop31,
    /// prop32, thm-a or thm-c.
    Verify {
        target: String,
        /// θ for magic and nweak, e.g. 1/2 or 0.9.
        #[arg(long)]
        theta: Option<String>,
        /// r,s,q for thm-c, e.g. 2,inf,1.
        #[arg(long)]
        params: Option<String>,
        /// t for prop32.
        #[arg(long)]
        t: Option<String>,
        /// Calibration constant for prop31/prop32.
        #[arg(long)]
        k: Option<f64>,
    },
    /// Weak-norm ratios along the power weights x^(eps-1), as CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.1,0.01,0.001")]
        eps: Vec<f64>,
    },
    /// Simulated annealing for large measured-to-bound ratios.
    Search {
        /// thm-a-ratio, prop32-ratio[:t] or thm-c-ratio:r,s,q.
        #[arg(long, default_value = "thm-a-ratio")]
        objective: String,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Where to write the best configuration as JSON.
        #[arg(long)]
        best: Option<PathBuf>,
    },
    /// Emit theorem instances as JSON.
    Gen {
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value_t = MAX_MEMBERS)]
        members: usize,
    },
}

/// A failed assertion, reported on stderr with exit code 1.
struct AssertionFailed(String);

enum Failure {
    Error(Error),
    Assert(AssertionFailed),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Malformed(_) => EXIT_MALFORMED,
        _ => EXIT_PARAM,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Assert(AssertionFailed(msg))) => {
            eprintln!("assertion failed: {msg}");
            EXIT_ASSERT
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Parameter(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool already built by an earlier call in the same process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let cfg = &cli.run;
    if cfg.trials == 0 {
        return Err(Error::Parameter("--trials must be at least 1".into()).into());
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(Error::Parameter(format!("--tol must be positive, got {}", cfg.tol)).into());
    }
    let res = Resolution::new(cfg.level)?;
    match &cli.command {
        Command::Constants { weight, family, fw } => {
            let w = load_weight(weight, cfg.seed, res)?;
            let family: IntervalFamily = family.parse()?;
            let mut c = characteristics(&w, family, *fw != FwChoice::Dyadic);
            if *fw == FwChoice::Exact {
                c.fw_dyadic = c.fw_exact.clone().expect("requested");
                c.witness.fw_dyadic = c.witness.fw_exact.expect("requested");
            }
            emit_json(cfg.out.as_deref(), &c)?;
        }
        Command::Verify { target, theta, params, t, k } => {
            let target: Target = target.parse()?;
            let mut suite = SuiteConfig::new(target, cfg.level);
            suite.tol = cfg.tol;
            suite.theta = theta.as_deref().map(parse_flag).transpose()?;
            suite.params = params.as_deref().map(|p| p.parse::<TheoremParams>().map_err(as_param)).transpose()?;
            suite.t = t.as_deref().map(parse_flag).transpose()?;
            suite.k = *k;
            let report = run_suite(&suite, cfg.seed, cfg.trials)?;
            emit_json(cfg.out.as_deref(), &report)?;
            if cfg.mode == Mode::Assert {
                if let Some(fail) = report.first_failure() {
                    return Err(Failure::Assert(AssertionFailed(format!(
                        "verify {target}: seed {} trial {} failed at step {} ({} of {} trials failed)",
                        cfg.seed,
                        fail.trial,
                        fail.step.as_deref().unwrap_or("unknown"),
                        report.failed,
                        report.trials
                    ))));
                }
            }
        }
        Command::Sweep { eps } => {
            if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                return Err(Error::Parameter("--eps values must lie in (0, 1]".into()).into());
            }
            let rows = power_sweep(cfg.level, eps, cfg.seed, cfg.trials)?;
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            emit_bytes(cfg.out.as_deref(), &buf)?;
        }
        Command::Search { objective, iters, best } => {
            let objective: Objective = objective.parse()?;
            let outcome = extremal_search(objective, cfg.seed, *iters, cfg.level)?;
            let mut buf = Vec::new();
            write_trajectory_csv(&outcome.trajectory, &mut buf)?;
            emit_bytes(cfg.out.as_deref(), &buf)?;
            if let Some(path) = best {
                emit_json(Some(path), &outcome.best_json())?;
            }
        }
        Command::Gen { params, members } => {
            let params = match params {
                Some(p) => p.parse::<TheoremParams>().map_err(as_param)?,
                None => TheoremParams::endpoint(),
            };
            let instances = (0..cfg.trials as u64)
                .map(|i| {
                    let input = theorem_instance(&mut trial_rng(cfg.seed, i), res, &params, *members)?;
                    Ok(GeneratedInstance {
                        trial: i,
                        params: params.to_string(),
                        v: input.v.density().to_json(),
                        h: input.h.to_json(),
                        s: input.s.to_json(),
                        e: input.e,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit_json(cfg.out.as_deref(), &instances)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct GeneratedInstance {
    trial: u64,
    params: String,
    v: GridFunctionJson,
    h: GridFunctionJson,
    s: SparseCollectionJson,
    e: CellSet,
}

fn as_param(e: Error) -> Error {
    match e {
        Error::Malformed(m) => Error::Parameter(m),
        other => other,
    }
}

fn parse_flag(s: &str) -> Result<Rat64> {
    parse_rat64(s).map_err(as_param)
}

/// A generator spec, or else a path to `{"L": .., "values": [..]}`.
fn load_weight(spec: &str, seed: u64, res: Resolution) -> Result<Weight> {
    if let Ok(kind) = spec.parse::<WeightKind>() {
        return generate_weight(kind, seed, res);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Parameter(format!("{spec:?} is neither a weight generator nor an existing file")));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::Malformed(format!("cannot read {spec}: {e}")))?;
    let json: GridFunctionJson = serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{spec}: {e}")))?;
    Weight::new(GridFunction::from_json(&json)?)
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Malformed(format!("serialization failed: {e}")))?;
    text.push('\n');
    emit_bytes(out, text.as_bytes())
}

fn emit_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let written = match out {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    };
    written.map_err(|e| Error::Malformed(format!("cannot write output: {e}")))
}
