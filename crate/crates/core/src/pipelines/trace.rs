//! Verification traces: ordered inequality steps plus a run summary.

use std::collections::HashMap;

use serde::Serialize;

use crate::check::CheckReport;
use crate::lattice::LatticeInterval;
use crate::real::Real;

/// Where the worst instance of a step was observed.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum TraceWitness {
    Interval(LatticeInterval),
    Cells { start: usize, end: usize },
    Layer { k: u32, root: LatticeInterval },
    Slice { lambda: Real, root: Option<LatticeInterval> },
}

/// One inequality `lhs ≤ rhs`, aggregated over every instance the run
/// checked. `lhs`, `rhs` and `constant` belong to the worst instance.
#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub name: &'static str,
    pub lhs: Real,
    pub rhs: Real,
    pub constant: Real,
    pub pass: bool,
    /// Number of instances checked.
    pub checks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TraceWitness>,
}

impl Step {
    /// `lhs/rhs` in floating point (0 when `lhs` vanishes).
    pub fn ratio(&self) -> f64 {
        let (a, b) = (self.lhs.to_f64(), self.rhs.to_f64());
        if a == 0.0 {
            0.0
        } else {
            a / b
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Measures {
    /// `w(E)` (resp. `v(E)`).
    pub e: Real,
    pub e_prime: Real,
    /// Weighted measure of the level set above `γ`.
    pub exceed: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceSummary {
    /// `"q>r"` or `"q<=r"`.
    pub branch: &'static str,
    /// The sparse form over `E'` divided by the target expression.
    pub final_ratio: f64,
    /// The sparse form divided by the run-specific bound `C*_run · target`.
    pub bound_ratio: f64,
    pub t: f64,
    pub t_prime: f64,
    pub gamma: Real,
    pub measures: Measures,
    pub form: Real,
    pub target: Real,
    pub c_star_run: f64,
    pub c_star_univ: f64,
    pub a1: Real,
    pub fw_dyadic: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fw_exact: Option<Real>,
    pub eta: Real,
    /// Number of members of `S₊` and of λ-pieces evaluated.
    pub members: usize,
    pub pieces: usize,
    /// `[(q/r)']^{q/r}` for the `q > r` branch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric_reference: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineTrace {
    pub steps: Vec<Step>,
    pub summary: TraceSummary,
}

impl PipelineTrace {
    /// Every step passed.
    pub fn green(&self) -> bool {
        self.steps.iter().all(|s| s.pass)
    }

    pub fn first_failure(&self) -> Option<&Step> {
        self.steps.iter().find(|s| !s.pass)
    }

    pub fn step(&self, name: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.name == name)
    }
}

/// Accumulates steps in first-seen order, keeping the worst instance.
pub(crate) struct TraceBuilder {
    steps: Vec<Step>,
    index: HashMap<&'static str, usize>,
    tol: f64,
}

impl TraceBuilder {
    pub(crate) fn new(tol: f64) -> Self {
        TraceBuilder { steps: Vec::new(), index: HashMap::new(), tol }
    }

    pub(crate) fn check(&mut self, name: &'static str, lhs: Real, rhs: Real, constant: Real, witness: Option<TraceWitness>) -> bool {
        let tol = self.tol;
        self.check_tol(name, lhs, rhs, constant, witness, tol)
    }

    pub(crate) fn check_tol(
        &mut self,
        name: &'static str,
        lhs: Real,
        rhs: Real,
        constant: Real,
        witness: Option<TraceWitness>,
        tol: f64,
    ) -> bool {
        let pass = lhs.le_tol(&rhs, tol);
        self.record(Step { name, lhs, rhs, constant, pass, checks: 1, witness })
    }

    /// An equality `lhs = rhs` (exact when both sides are rational).
    pub(crate) fn check_eq(&mut self, name: &'static str, lhs: Real, rhs: Real, witness: Option<TraceWitness>) -> bool {
        let pass = lhs.eq_tol(&rhs, self.tol);
        self.record(Step { name, lhs, rhs, constant: Real::one(), pass, checks: 1, witness })
    }

    pub(crate) fn report(&mut self, name: &'static str, rep: CheckReport, constant: Real, witness: Option<TraceWitness>) -> bool {
        let pass = rep.pass;
        self.record(Step { name, lhs: rep.lhs, rhs: rep.rhs, constant, pass, checks: 1, witness })
    }

    fn record(&mut self, step: Step) -> bool {
        let pass = step.pass;
        match self.index.get(step.name) {
            None => {
                self.index.insert(step.name, self.steps.len());
                self.steps.push(step);
            }
            Some(&i) => {
                let cur = &mut self.steps[i];
                let checks = cur.checks + 1;
                let replace = (cur.pass && !step.pass) || (cur.pass == step.pass && step.ratio() > cur.ratio());
                if replace {
                    *cur = step;
                }
                cur.checks = checks;
            }
        }
        pass
    }

    /// The trace with steps listed in `order`; a step with nothing to check
    /// appears with `checks = 0`. Steps outside `order` follow at the end.
    pub(crate) fn finish(self, summary: TraceSummary, order: &[&'static str]) -> PipelineTrace {
        let mut slots: Vec<Option<Step>> = self.steps.into_iter().map(Some).collect();
        let mut steps: Vec<Step> = order
            .iter()
            .map(|&name| match self.index.get(name) {
                Some(&i) => slots[i].take().expect("each step listed once"),
                None => Step { name, lhs: Real::zero(), rhs: Real::zero(), constant: Real::one(), pass: true, checks: 0, witness: None },
            })
            .collect();
        steps.extend(slots.into_iter().flatten());
        PipelineTrace { steps, summary }
    }
}
