//! Simulated annealing for configurations with a large measured-to-bound
//! ratio.
//!
//! The state is a triple of integer cell values for the weight and the
//! density, a single-grid sparse collection, and a range of cells `E`. Moves
//! rescale a dyadic block of the weight, rewrite a block of the density, add
//! or remove a member of the collection (only sparse results are kept), or
//! move `E`. Every random draw comes from one stream keyed by the seed.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{exact_pair, random_collection, random_density_values, random_grid, random_weight_values, trial_rng};
use crate::error::{param, Error, Result};
use crate::gridfn::{CellSet, GridFunction, GridFunctionJson};
use crate::lattice::{GridId, LatticeInterval, Resolution};
use crate::real::{Rat64, DEFAULT_TOL};
use crate::sparse::{verify_sparsity, Eta, SparseCollection, SparseCollectionJson};
use crate::weights::Weight;

use super::props::prop32_check;
use super::theorem::{verify_theorem, TheoremInput, TheoremParams};

const VALUE_CAP: i128 = 1 << 16;
const MAX_MEMBERS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    /// `form / ([w]_1 (1 + log [w]_FW))` from the endpoint pipeline.
    ThmA,
    /// `‖A^t_S f‖_{L^{1,∞}_w} / (t'·[w]_1·‖f‖_{L^1_w})`.
    Prop32 { t: Rat64 },
    /// The pipeline's `final_ratio` for `(r, s, q)`.
    ThmC(TheoremParams),
}

impl Objective {
    fn params(&self) -> Option<TheoremParams> {
        match self {
            Objective::ThmA => Some(TheoremParams::endpoint()),
            Objective::ThmC(p) => Some(*p),
            Objective::Prop32 { .. } => None,
        }
    }

    fn eta(&self) -> Eta {
        match self.params() {
            Some(p) => p.eta(),
            None => Eta::rational(1, 2),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::ThmA => write!(f, "thm-a-ratio"),
            Objective::Prop32 { t } => write!(f, "prop32-ratio:{t}"),
            Objective::ThmC(p) => write!(f, "thm-c-ratio:{p}"),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    /// `thm-a-ratio`, `prop32-ratio[:t]` (default `t = 2`) or `thm-c-ratio:r,s,q`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("thm-a-ratio", None) => Ok(Objective::ThmA),
            ("prop32-ratio", None) => Ok(Objective::Prop32 { t: Rat64::from_integer(2) }),
            ("prop32-ratio", Some(t)) => Ok(Objective::Prop32 { t: crate::real::parse_rat64(t)? }),
            ("thm-c-ratio", Some(p)) => Ok(Objective::ThmC(p.parse()?)),
            ("thm-c-ratio", None) => param("thm-c-ratio needs parameters, e.g. thm-c-ratio:2,4,1"),
            _ => param(format!("unknown objective {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
struct State {
    u: Vec<i128>,
    raw: Vec<i128>,
    members: Vec<LatticeInterval>,
    e: Range<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub current: f64,
    pub best: f64,
    pub accepted: bool,
}

/// The best configuration found, with its objective value.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub objective: Objective,
    pub weight: Weight,
    pub f: GridFunction,
    pub s: SparseCollection,
    pub e: CellSet,
    pub best: f64,
    pub trajectory: Vec<TrajectoryRow>,
}

#[derive(Serialize)]
pub struct SearchBestJson {
    pub objective: String,
    pub value: f64,
    pub weight: GridFunctionJson,
    pub f: GridFunctionJson,
    pub s: SparseCollectionJson,
    pub e: CellSet,
}

impl SearchOutcome {
    pub fn best_json(&self) -> SearchBestJson {
        SearchBestJson {
            objective: self.objective.to_string(),
            value: self.best,
            weight: self.weight.density().to_json(),
            f: self.f.to_json(),
            s: self.s.to_json(),
            e: self.e.clone(),
        }
    }
}

struct Searcher {
    objective: Objective,
    res: Resolution,
    grid: GridId,
    eta: Eta,
}

struct Built {
    weight: Weight,
    f: GridFunction,
    s: SparseCollection,
    e: CellSet,
}

impl Searcher {
    fn build(&self, st: &State) -> Result<Built> {
        let s = SparseCollection::new(self.res, self.eta.clone(), st.members.iter().copied())?;
        let e = CellSet::from_range(st.e.clone());
        let (weight, f) = match self.objective.params() {
            Some(p) => exact_pair(self.res, &p, &st.u, &st.raw)?,
            None => (
                Weight::new(GridFunction::from_integers(self.res, st.u.clone(), 1)?)?,
                GridFunction::from_integers(self.res, st.raw.clone(), 1)?,
            ),
        };
        Ok(Built { weight, f, s, e })
    }

    fn value(&self, b: &Built) -> Result<f64> {
        match &self.objective {
            Objective::Prop32 { t } => Ok(prop32_check(&b.s, &b.f, *t, &b.weight, 1.0)?.measured),
            obj => {
                let params = obj.params().expect("theorem objective");
                let input = TheoremInput { v: b.weight.clone(), h: b.f.clone(), s: b.s.clone(), e: b.e.clone() };
                Ok(verify_theorem(&params, &input, DEFAULT_TOL)?.summary.final_ratio)
            }
        }
    }

    fn seed_state(&self, rng: &mut ChaCha8Rng) -> Result<State> {
        let n = self.res.cell_count();
        let u = random_weight_values(rng, self.res);
        let raw = random_density_values(rng, self.res);
        let f = GridFunction::from_integers(self.res, raw.clone(), 1)?;
        let s = random_collection(rng, &f, self.grid, &self.eta, MAX_MEMBERS)?;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(a + 1..=n);
        Ok(State { u, raw, members: s.intervals().collect(), e: a..b })
    }

    fn random_block(&self, rng: &mut ChaCha8Rng) -> LatticeInterval {
        loop {
            let j = rng.gen_range(0..=self.res.level());
            let ks = self.res.k_range(self.grid, j);
            if !ks.is_empty() {
                return self.res.interval(self.grid, j, rng.gen_range(ks)).expect("k drawn from the valid range");
            }
        }
    }

    /// A proposal, or `None` when the move leaves the admissible region.
    fn propose(&self, rng: &mut ChaCha8Rng, st: &State) -> Option<State> {
        let mut next = st.clone();
        match rng.gen_range(0..5) {
            0 => {
                let q = self.random_block(rng);
                let up = rng.gen_bool(0.5);
                for x in &mut next.u[q.cells()] {
                    *x = if up { (*x * 2).min(VALUE_CAP) } else { (*x / 2).max(1) };
                }
            }
            1 => {
                let q = self.random_block(rng);
                let h = rng.gen_range(0..=64);
                next.raw[q.cells()].fill(h);
                if next.raw.iter().all(|&x| x == 0) {
                    return None;
                }
            }
            2 => {
                let q = self.random_block(rng);
                if next.members.contains(&q) || next.members.len() >= MAX_MEMBERS {
                    return None;
                }
                next.members.push(q);
            }
            3 => {
                if next.members.len() <= 1 {
                    return None;
                }
                let i = rng.gen_range(0..next.members.len());
                next.members.swap_remove(i);
            }
            _ => {
                let n = self.res.cell_count();
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(a + 1..=n);
                next.e = a..b;
            }
        }
        Some(next)
    }
}

/// Anneals for `iters` evaluations starting from the configuration drawn by
/// `seed`. Row 0 of the trajectory is the seed configuration; `iters = 1`
/// returns it unchanged.
pub fn extremal_search(objective: Objective, seed: u64, iters: usize, level: u32) -> Result<SearchOutcome> {
    if iters == 0 {
        return param("iters must be at least 1");
    }
    let res = Resolution::new(level)?;
    let mut rng = trial_rng(seed, 0);
    let grid = random_grid(&mut rng);
    let searcher = Searcher { eta: objective.eta(), objective, res, grid };

    let mut cur = searcher.seed_state(&mut rng)?;
    let built = searcher.build(&cur)?;
    let mut cur_val = searcher.value(&built)?;
    let (mut best, mut best_val) = (built, cur_val);
    let mut trajectory = vec![TrajectoryRow { iter: 0, current: cur_val, best: best_val, accepted: true }];

    for iter in 1..iters {
        let temp = 0.25 * (1.0 - iter as f64 / iters as f64);
        let candidate = searcher.propose(&mut rng, &cur).and_then(|st| {
            let b = searcher.build(&st).ok()?;
            if !verify_sparsity(&b.s).pass {
                return None;
            }
            let v = searcher.value(&b).ok()?;
            v.is_finite().then_some((st, b, v))
        });
        let accepted = match candidate {
            Some((st, b, v)) => {
                let delta = (v - cur_val) / cur_val.max(1e-12);
                let u: f64 = rng.gen();
                let take = delta >= 0.0 || (temp > 0.0 && u < (delta / temp).exp());
                if take {
                    cur = st;
                    cur_val = v;
                    if v > best_val {
                        best_val = v;
                        best = b;
                    }
                }
                take
            }
            None => false,
        };
        trajectory.push(TrajectoryRow { iter, current: cur_val, best: best_val, accepted });
    }

    Ok(SearchOutcome { objective: searcher.objective, weight: best.weight, f: best.f, s: best.s, e: best.e, best: best_val, trajectory })
}

/// Writes `iter,current,best,accepted` rows.
pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Malformed(format!("CSV output failed: {e}"));
    wr.write_record(["iter", "current", "best", "accepted"]).map_err(io)?;
    for r in rows {
        wr.write_record([r.iter.to_string(), format!("{:.12e}", r.current), format!("{:.12e}", r.best), r.accepted.to_string()])
            .map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Malformed(format!("CSV output failed: {e}")))?;
    Ok(())
}
