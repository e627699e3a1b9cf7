//! Seeded property suites: one randomized instance per trial, for every
//! verifier reachable from the command line.
//!
//! Trial `i` draws from [`trial_rng`]`(seed, i)`, so a suite's outcome does
//! not depend on how trials are scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::check::CheckReport;
use crate::corpus::{random_cells, random_collection, random_density, random_grid, random_weight, theorem_instance, trial_rng};
use crate::error::{Error, Result};
use crate::gridfn::{kolmogorov_check, kolmogorov_subset, MeasureSpec};
use crate::lattice::Resolution;
use crate::maximal::n_weak_check;
use crate::pipelines::{calibration, prop31_check, prop32_check, verify_theorem, TheoremParams};
use crate::real::{Rat64, Real};
use crate::sparse::{carleson_sum, magic_selection, CoefficientFamily, Eta, SparseCollection};

/// Members kept in randomly generated collections.
pub const MAX_MEMBERS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Kolmogorov,
    Magic,
    Nweak,
    Carleson,
    Prop31,
    Prop32,
    ThmA,
    ThmC,
}

impl Target {
    pub const ALL: [Target; 8] =
        [Target::Kolmogorov, Target::Magic, Target::Nweak, Target::Carleson, Target::Prop31, Target::Prop32, Target::ThmA, Target::ThmC];

    pub fn name(&self) -> &'static str {
        match self {
            Target::Kolmogorov => "kolmogorov",
            Target::Magic => "magic",
            Target::Nweak => "nweak",
            Target::Carleson => "carleson",
            Target::Prop31 => "prop31",
            Target::Prop32 => "prop32",
            Target::ThmA => "thm-a",
            Target::ThmC => "thm-c",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| Error::Parameter(format!("unknown verify target {s:?}")))
    }
}

/// Everything a suite needs besides the seed and trial count.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub target: Target,
    pub level: u32,
    pub tol: f64,
    /// `θ` for `magic` and `nweak` (default `1/2`).
    pub theta: Option<Rat64>,
    /// `(r, s, q)` for `thm-c` (default the endpoint).
    pub params: Option<TheoremParams>,
    /// `t` for `prop32` (default: drawn per trial).
    pub t: Option<Rat64>,
    /// Overrides the shipped calibration constant of `prop31`/`prop32`.
    pub k: Option<f64>,
}

impl SuiteConfig {
    pub fn new(target: Target, level: u32) -> Self {
        SuiteConfig { target, level, tol: crate::real::DEFAULT_TOL, theta: None, params: None, t: None, k: None }
    }

    fn theta(&self) -> Rat64 {
        self.theta.unwrap_or(Rat64::new(1, 2))
    }
}

/// One trial's verdict.
#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub trial: u64,
    pub pass: bool,
    /// The first failing step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<String>,
    /// The largest `lhs / rhs` over the trial's checks, or the pipeline's
    /// `final_ratio`.
    pub ratio: f64,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub target: Target,
    pub seed: u64,
    #[serde(rename = "L")]
    pub level: u32,
    pub tol: f64,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub max_ratio: f64,
    /// Largest `final_ratio`, for the theorem targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_final_ratio: Option<f64>,
    pub results: Vec<TrialReport>,
}

impl SuiteReport {
    pub fn first_failure(&self) -> Option<&TrialReport> {
        self.results.iter().find(|r| !r.pass)
    }
}

/// Runs `trials` instances concurrently and collects them in trial order.
pub fn run_suite(cfg: &SuiteConfig, seed: u64, trials: usize) -> Result<SuiteReport> {
    let results = (0..trials as u64).into_par_iter().map(|i| run_trial(cfg, seed, i)).collect::<Result<Vec<_>>>()?;
    let passed = results.iter().filter(|r| r.pass).count();
    let max_ratio = results.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let theorem = matches!(cfg.target, Target::ThmA | Target::ThmC);
    Ok(SuiteReport {
        target: cfg.target,
        seed,
        level: cfg.level,
        tol: cfg.tol,
        trials,
        passed,
        failed: trials - passed,
        max_ratio,
        max_final_ratio: theorem.then_some(max_ratio),
        results,
    })
}

/// Named checks, re-evaluated at the suite tolerance.
struct Checks {
    tol: f64,
    items: Vec<(&'static str, CheckReport)>,
}

impl Checks {
    fn new(tol: f64) -> Self {
        Checks { tol, items: Vec::new() }
    }

    fn push(&mut self, name: &'static str, c: CheckReport) {
        let pass = c.lhs.le_tol(&c.rhs, self.tol);
        self.items.push((name, CheckReport { pass, ..c }));
    }

    fn flag(&mut self, name: &'static str, ok: bool) {
        let (lhs, rhs) = if ok { (Real::zero(), Real::zero()) } else { (Real::one(), Real::zero()) };
        self.items.push((name, CheckReport { lhs, rhs, pass: ok }));
    }

    fn finish(self, trial: u64, mut detail: serde_json::Value) -> TrialReport {
        let step = self.items.iter().find(|(_, c)| !c.pass).map(|(n, _)| n.to_string());
        let ratio = self.items.iter().map(|(_, c)| c.ratio()).filter(|r| r.is_finite()).fold(0.0, f64::max);
        let checks: serde_json::Map<String, serde_json::Value> =
            self.items.iter().map(|(n, c)| (n.to_string(), serde_json::to_value(c).expect("serializable"))).collect();
        detail["checks"] = serde_json::Value::Object(checks);
        TrialReport { trial, pass: step.is_none(), step, ratio, detail }
    }
}

fn json(v: impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

/// Runs trial `index` of the suite.
pub fn run_trial(cfg: &SuiteConfig, seed: u64, index: u64) -> Result<TrialReport> {
    let res = Resolution::new(cfg.level)?;
    let mut rng = trial_rng(seed, index);
    let rng = &mut rng;
    match cfg.target {
        Target::Kolmogorov => kolmogorov_trial(cfg, rng, res, index),
        Target::Magic => magic_trial(cfg, rng, res, index),
        Target::Nweak => {
            let theta = cfg.theta();
            let f = random_density(rng, res)?;
            let w = random_weight(rng, res)?;
            let grid = random_grid(rng);
            let mut checks = Checks::new(cfg.tol);
            checks.push("n_weak", n_weak_check(&f, &w, theta, grid)?);
            Ok(checks.finish(index, serde_json::json!({ "theta": theta.to_string(), "grid": grid.label() })))
        }
        Target::Carleson => {
            let f = random_density(rng, res)?;
            let w = random_weight(rng, res)?;
            let grid = random_grid(rng);
            let s = random_collection(rng, &f, grid, &Eta::rational(1, 2), MAX_MEMBERS)?;
            let members: Vec<_> = s.intervals().collect();
            let q0 = *members.choose(rng).expect("collections are nonempty");
            let rep = carleson_sum(&s, &w, &q0)?;
            let mut checks = Checks::new(cfg.tol);
            checks.push("carleson", CheckReport { lhs: rep.sum, rhs: rep.bound, pass: rep.pass });
            Ok(checks.finish(index, serde_json::json!({ "root": q0, "members": s.len() })))
        }
        Target::Prop31 => {
            let f = random_density(rng, res)?;
            let w = random_weight(rng, res)?;
            let grid = random_grid(rng);
            let s = random_collection(rng, &f, grid, &Eta::rational(1, 2), MAX_MEMBERS)?;
            let a = random_coefficients(rng, &s)?;
            let ts = [Rat64::from_integer(1), Rat64::new(3, 2), Rat64::from_integer(2), Rat64::from_integer(3), Rat64::from_integer(4)];
            let i = rng.gen_range(0..ts.len());
            let j = rng.gen_range(i..ts.len());
            let k = cfg.k.unwrap_or_else(|| calibration().prop31.k);
            let rep = prop31_check(&s, &a, ts[i], ts[j], &w, k)?;
            let mut checks = Checks::new(cfg.tol);
            checks.push("prop31", rep.check.clone());
            Ok(checks
                .finish(index, serde_json::json!({ "t1": ts[i].to_string(), "t2": ts[j].to_string(), "measured": rep.measured, "k": k })))
        }
        Target::Prop32 => {
            let f = random_density(rng, res)?;
            let w = random_weight(rng, res)?;
            let grid = random_grid(rng);
            let s = random_collection(rng, &f, grid, &Eta::rational(1, 2), MAX_MEMBERS)?;
            let choices = [Rat64::new(11, 10), Rat64::new(5, 4), Rat64::new(3, 2), Rat64::from_integer(2), Rat64::from_integer(3)];
            let drawn = *choices.choose(rng).expect("nonempty");
            let t = cfg.t.unwrap_or(drawn);
            let k = cfg.k.unwrap_or_else(|| calibration().prop32.k);
            let rep = prop32_check(&s, &f, t, &w, k)?;
            let mut checks = Checks::new(cfg.tol);
            checks.push("prop32", rep.check.clone());
            Ok(checks.finish(index, serde_json::json!({ "t": t.to_string(), "measured": rep.measured, "k": k })))
        }
        Target::ThmA | Target::ThmC => {
            let params = match cfg.target {
                Target::ThmA => TheoremParams::endpoint(),
                _ => cfg.params.unwrap_or_else(TheoremParams::endpoint),
            };
            let input = theorem_instance(rng, res, &params, MAX_MEMBERS)?;
            let trace = verify_theorem(&params, &input, cfg.tol)?;
            Ok(TrialReport {
                trial: index,
                pass: trace.green(),
                step: trace.first_failure().map(|s| s.name.to_string()),
                ratio: trace.summary.final_ratio,
                detail: json(&trace),
            })
        }
    }
}

fn random_coefficients(rng: &mut ChaCha8Rng, s: &SparseCollection) -> Result<CoefficientFamily> {
    CoefficientFamily::new(s.intervals().map(|q| (q, Real::int(rng.gen_range(1..=20)))).collect::<Vec<_>>())
}

fn kolmogorov_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, res: Resolution, index: u64) -> Result<TrialReport> {
    let f = random_density(rng, res)?;
    let w = random_weight(rng, res)?;
    let weighted = rng.gen_bool(0.5);
    let mu = if weighted { MeasureSpec::Weighted(&w) } else { MeasureSpec::Lebesgue };
    let e = random_cells(rng, res);
    let ps = [Rat64::new(1, 2), Rat64::from_integer(1), Rat64::new(3, 2), Rat64::from_integer(2), Rat64::from_integer(3)];
    let p = *ps.choose(rng).expect("nonempty");
    let theta = p * Rat64::new(rng.gen_range(1..=3), 4);
    let q = p * Rat64::new(rng.gen_range(1..=3), 4);
    let mut checks = Checks::new(cfg.tol);
    checks.push("kolmogorov", kolmogorov_check(&f, mu, &e, p, theta)?);
    let sub = kolmogorov_subset(&f, mu, &e, p, q)?;
    checks.push("subset_measure", sub.measure);
    checks.push("subset_integral", sub.integral);
    checks.push("converse", sub.converse);
    Ok(checks.finish(
        index,
        serde_json::json!({
            "p": p.to_string(), "theta": theta.to_string(), "q": q.to_string(),
            "measure": if weighted { "weighted" } else { "lebesgue" }, "e_cells": e.len(),
        }),
    ))
}

fn magic_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, res: Resolution, index: u64) -> Result<TrialReport> {
    let theta = cfg.theta();
    let f = random_density(rng, res)?;
    let w = random_weight(rng, res)?;
    let grid = random_grid(rng);
    let s = random_collection(rng, &f, grid, &Eta::magic(theta)?, MAX_MEMBERS)?;
    let members: Vec<_> = s.intervals().collect();
    let q = *members.choose(rng).expect("collections are nonempty");
    // λ places q inside its own selection band (λ a_w, 2λ a_w]
    let x = Real::frac(8 + rng.gen_range(1..=8), 8);
    let pw = w.density().prefix();
    let lambda = f.mean(q.cells()) * pw.average(q.cells()).pow(-theta) / x;
    let lambda = if lambda.is_positive() { lambda } else { Real::one() };
    let out = magic_selection(&s, &f, &w, &lambda, theta)?;
    let mut checks = Checks::new(cfg.tol);
    checks.flag("magic_disjoint", out.disjoint);
    checks.push("magic_half", out.half);
    checks.push("magic_conclusion", out.conclusion);
    Ok(checks.finish(
        index,
        serde_json::json!({ "theta": theta.to_string(), "lambda": lambda, "members": s.len(), "selected": out.selected.len() }),
    ))
}
