//! Step-by-step verification of the restricted weak-type sparse bounds.
//!
//! For `0 < r < s ≤ ∞`, `0 < q < s`, the pipeline takes the rescaled weight
//! `v = w^{1/(1/r−1/s)}`, the density `h = |f|^r` normalised by
//! `∫ h v^{1−r/s} = 1`, a single-grid sparse collection `S` and a set `E`, and
//! bounds the sparse form
//!
//! ```text
//!   Σ_{Q∈S} ⟨f⟩_{r,Q}^q ⟨v 1_{E'}⟩_{1,Q}^{1−q/s} |Q|
//! ```
//!
//! through an explicit chain of inequalities, checking each one on the data.
//! With `θ = r/s`, `a_Q = ⟨h⟩_Q ⟨v⟩_Q^{−θ}` and `γ = 6 [v]_1^{1−θ} / v(E)`:
//!
//! * `E' = {x ∈ E : N f(x) ≤ γ}` loses at most a sixth of `v(E)`, and every
//!   `Q` with `a_Q > γ` misses `E'`, leaving `S₊ = {a_Q ≤ γ}`;
//! * for `q > r` the layers `S_k = {2^{−k−1}γ < a_Q ≤ 2^{−k}γ}` are summed
//!   geometrically after the disjointness lemma and the `A_1` step;
//! * for `q ≤ r` the form is sliced in `λ ∈ (0,1]` at the finitely many
//!   breakpoints `b_Q = (v(E'∩Q)/v(Q))^{1−q/s}`, and each slice is bounded by
//!   two Hölder inequalities, the Carleson packing bound and the same layer
//!   argument with exponent `t`.
//!
//! Setting `r = q = 1`, `s = ∞` gives the `L¹` endpoint with `w = v`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::traits::{One, Zero};

use super::trace::{Measures, PipelineTrace, TraceBuilder, TraceSummary, TraceWitness};
use crate::check::CheckReport;
use crate::error::{param, Error, Result};
use crate::gridfn::{CellSet, GridFunction};
use crate::lattice::{GridId, LatticeInterval};
use crate::maximal::{n_weak_check, twisted, weighted_n};
use crate::real::{parse_rat64, rat_to_f64, Exponent, Rat64, Real, DEFAULT_TOL};
use crate::sparse::{verify_sparsity, Eta, Forest, SparseCollection};
use crate::weights::{a1_constant, fw_constant, FwMode, IntervalFamily, LimitedRangeMap, Weight};

/// Largest level at which the exact Fujii–Wilson constant is reported.
const EXACT_FW_MAX_LEVEL: u32 = 8;

/// Exponents `(r, s, q)` of the weak-type bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremParams {
    pub r: Rat64,
    pub s: Exponent,
    pub q: Rat64,
}

/// Which half of the argument applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `q > r`: geometric layers.
    Layers,
    /// `q ≤ r`: λ-slices.
    Slices,
}

impl TheoremParams {
    pub fn new(r: Rat64, s: Exponent, q: Rat64) -> Result<Self> {
        if r <= Rat64::zero() || q <= Rat64::zero() {
            return param(format!("r and q must be positive, got r={r}, q={q}"));
        }
        if r.recip() <= s.recip() || q.recip() <= s.recip() {
            return param(format!("need r < s and q < s, got r={r}, s={s}, q={q}"));
        }
        Ok(TheoremParams { r, s, q })
    }

    /// `r = q = 1`, `s = ∞`.
    pub fn endpoint() -> Self {
        TheoremParams { r: Rat64::one(), s: Exponent::Infinite, q: Rat64::one() }
    }

    pub fn theta(&self) -> Rat64 {
        self.r * self.s.recip()
    }

    /// `1 − q/s`.
    pub fn beta(&self) -> Rat64 {
        Rat64::one() - self.q * self.s.recip()
    }

    pub fn q_over_r(&self) -> Rat64 {
        self.q / self.r
    }

    pub fn branch(&self) -> Branch {
        if self.q > self.r {
            Branch::Layers
        } else {
            Branch::Slices
        }
    }

    /// `η_{r,s}` with `(1−η)^{1−r/s} = (1−r/s)/4`.
    pub fn eta(&self) -> Eta {
        Eta::MagicThreshold(self.theta())
    }

    pub fn rescaling(&self) -> LimitedRangeMap {
        LimitedRangeMap::new(self.r, self.s).expect("validated exponents")
    }

    /// `2 (s/r)'`, the value of `t'` at `[v]_FW = 1`.
    pub fn t_prime_floor(&self) -> f64 {
        2.0 / (1.0 - rat_to_f64(self.theta()))
    }

    /// `(t, t')` with `t' = 2(s/r)' + log [v]_FW`.
    pub fn holder_pair(&self, fw: &Real) -> (f64, f64) {
        let tp = self.t_prime_floor() + fw.ln().max(0.0);
        (tp / (tp - 1.0), tp)
    }
}

impl fmt::Display for TheoremParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", Exponent::Finite(self.r), self.s, Exponent::Finite(self.q))
    }
}

impl FromStr for TheoremParams {
    type Err = Error;

    /// `"r,s,q"`, e.g. `"2,inf,1"` or `"1,4,2"`.
    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let [r, s, q] = parts.as_slice() else {
            return Err(Error::Malformed(format!("expected r,s,q, got {text:?}")));
        };
        TheoremParams::new(parse_rat64(r)?, s.parse()?, parse_rat64(q)?)
    }
}

/// Inputs in rescaled form: `v = w_{r,s}` and `h = |f|^r`.
#[derive(Clone, Debug)]
pub struct TheoremInput {
    pub v: Weight,
    pub h: GridFunction,
    pub s: SparseCollection,
    pub e: CellSet,
}

impl TheoremInput {
    /// Rescales `(w, f)` to `(v, h)`.
    pub fn from_original(w: &Weight, f: &GridFunction, params: &TheoremParams, s: SparseCollection, e: CellSet) -> Result<Self> {
        let v = w.pow(params.rescaling().exponent)?;
        let h = absolute(f)?.pow(params.r)?;
        Ok(TheoremInput { v, h, s, e })
    }
}

fn absolute(f: &GridFunction) -> Result<GridFunction> {
    if f.to_f64_vec().iter().all(|x| *x >= 0.0) {
        return Ok(f.clone());
    }
    GridFunction::from_reals(f.resolution(), f.values().into_iter().map(|v| if v.to_f64() < 0.0 { -v } else { v }).collect())
}

/// The set `E'` and the bookkeeping of its construction.
#[derive(Clone, Debug)]
pub struct EPrime {
    pub set: CellSet,
    pub gamma: Real,
    pub grid: GridId,
    pub measures: Measures,
    /// `v({N f > γ}) ≤ v(E)/6`.
    pub level_set: CheckReport,
    /// `(5/6) v(E) ≤ v(E')`.
    pub measure_bound: CheckReport,
}

/// Builds `E' = {x ∈ E : N^D f(x) ≤ γ}` on the grid `grid` and checks that
/// it keeps five sixths of the weighted measure of `E`.
pub fn reduction_construct_eprime(f: &GridFunction, v: &Weight, e: &CellSet, params: &TheoremParams, grid: GridId) -> Result<EPrime> {
    let h = absolute(f)?.pow(params.r)?;
    normalised(&h, v, params.theta(), DEFAULT_TOL)?;
    let a1 = a1_constant(v, IntervalFamily::DyadicThreeGrids).value;
    eprime(&h, v, e, params.theta(), grid, &a1, DEFAULT_TOL)
}

/// `h v^{1−θ}`, after checking that it integrates to 1.
fn normalised(h: &GridFunction, v: &Weight, theta: Rat64, tol: f64) -> Result<GridFunction> {
    let g = h.mul(&v.density().pow(Rat64::one() - theta)?)?;
    let norm = g.prefix().total();
    if !norm.eq_tol(&Real::one(), tol) {
        return Err(Error::Normalization { norm: norm.to_f64() });
    }
    Ok(g)
}

fn eprime(h: &GridFunction, v: &Weight, e: &CellSet, theta: Rat64, grid: GridId, a1: &Real, tol: f64) -> Result<EPrime> {
    let res = v.resolution();
    if h.resolution() != res {
        return Err(Error::ResolutionMismatch { expected: res.level(), found: h.resolution().level() });
    }
    let ve = v.measure_set(e);
    if !ve.is_positive() {
        return param("E must have positive weighted measure");
    }
    let gamma = Real::int(6) * a1.pow(Rat64::one() - theta) / &ve;
    let n = weighted_n(h, v, theta, grid)?;
    let set = e.filter(|c| n.value(c) <= gamma);
    let exceed_cells = CellSet::from_mask(&(0..res.cell_count()).map(|c| n.value(c) > gamma).collect::<Vec<_>>());
    let exceed = v.measure_set(&exceed_cells);
    let e_prime = v.measure_set(&set);
    let sixth = Real::frac(1, 6);
    let level_set = CheckReport::le(exceed.clone(), &ve * &sixth, tol);
    let measure_bound = CheckReport::le(Real::frac(5, 6) * &ve, e_prime.clone(), tol);
    Ok(EPrime { set, gamma, grid, measures: Measures { e: ve, e_prime, exceed }, level_set, measure_bound })
}

/// Verifies the endpoint bound for `w`, `f` normalised in `L¹_w`.
pub fn thm_a_verify(w: &Weight, f: &GridFunction, s: &SparseCollection, e: &CellSet) -> Result<PipelineTrace> {
    thm_c_verify(w, &TheoremParams::endpoint(), f, s, e)
}

/// Verifies the bound for `(r, s, q)`, `f` normalised in `L^r_w`.
pub fn thm_c_verify(w: &Weight, params: &TheoremParams, f: &GridFunction, s: &SparseCollection, e: &CellSet) -> Result<PipelineTrace> {
    let input = TheoremInput::from_original(w, f, params, s.clone(), e.clone())?;
    verify_theorem(params, &input, DEFAULT_TOL)
}

struct Member {
    q: LatticeInterval,
    vq: Real,
    hq: Real,
    gq: Real,
    /// `⟨v⟩_Q^{1−θ}`
    vpow: Real,
    a: Real,
    a_qr: Real,
    /// `a^t` on the slice branch, `a^{q/r}` on the layer branch.
    a_pow: Real,
    ve: Real,
    b: Real,
}

struct Context<'a> {
    members: Vec<Member>,
    gamma: Real,
    a1_pow: Real,
    layer_exp: f64,
    tb: &'a mut TraceBuilder,
}

struct LayerSums {
    /// `Σ a^t v(Q)` (resp. `a^{q/r}`).
    power: Real,
    /// `Σ ∫_{E_Q} h v^{1−θ}`.
    budget: Real,
}

/// `k ≥ 0` with `2^{−k−1} γ < a ≤ 2^{−k} γ`.
fn layer_of(a: &Real, gamma: &Real) -> u32 {
    let guess = (gamma.to_f64() / a.to_f64()).log2().floor().max(0.0) as u32;
    let mut k = guess;
    let two = Real::int(2);
    while k > 0 && two.pow(Rat64::from_integer(k as i64)) * a > *gamma {
        k -= 1;
    }
    while two.pow(Rat64::from_integer(k as i64 + 1)) * a <= *gamma {
        k += 1;
    }
    k
}

impl Context<'_> {
    /// Checks one layer (members given in pre-order) and returns its sums.
    fn layer(&mut self, idx: &[usize], k: u32, root: LatticeInterval) -> LayerSums {
        let two = Real::int(2);
        let half = Real::frac(1, 2);
        let forest = Forest::new(idx.iter().map(|&i| self.members[i].q).collect());
        debug_assert!(forest.nodes.iter().zip(idx).all(|(q, &i)| *q == self.members[i].q));
        let wit = |q: LatticeInterval| Some(TraceWitness::Layer { k, root: q });
        let mut overlaps = 0i64;
        let mut last_root: Option<LatticeInterval> = None;
        let (mut power, mut linear, mut magic, mut budget) = (Real::zero(), Real::zero(), Real::zero(), Real::zero());
        for (n, &i) in idx.iter().enumerate() {
            let m = &self.members[i];
            if forest.parent[n].is_none() {
                if last_root.is_some_and(|r| !r.is_disjoint(&m.q)) {
                    overlaps += 1;
                }
                last_root = Some(m.q);
            }
            let kids = &forest.children[n];
            overlaps += kids.windows(2).filter(|p| !forest.nodes[p[0]].is_disjoint(&forest.nodes[p[1]])).count() as i64;
            overlaps += kids.iter().filter(|&&c| !m.q.strictly_contains(&forest.nodes[c])).count() as i64;
            let kids_h: Real = kids.iter().map(|&c| &self.members[idx[c]].hq).sum();
            let kids_g: Real = kids.iter().map(|&c| &self.members[idx[c]].gq).sum();
            let he = &m.hq - &kids_h;
            let ge = &m.gq - &kids_g;
            self.tb.check("magic_half", kids_h, &m.hq * &half, half.clone(), wit(m.q));
            self.tb.check("magic_conclusion", m.hq.clone(), &two * &he, two.clone(), wit(m.q));
            power = power + &m.a_pow * &m.vq;
            linear = linear + &m.a * &m.vq;
            magic = magic + he * &m.vpow;
            budget = budget + ge;
        }
        self.tb.check("magic_disjoint", Real::int(overlaps), Real::zero(), Real::one(), wit(root));
        let scale = (self.gamma.clone() / Real::int(2).pow(Rat64::from_integer(k as i64))).powf(self.layer_exp - 1.0);
        self.tb.check("layer_power", power.clone(), &scale * &linear, scale.clone(), wit(root));
        self.tb.check("magic_sum", linear, &two * &magic, two.clone(), wit(root));
        self.tb.check("a1_step", magic, &self.a1_pow * &budget, self.a1_pow.clone(), wit(root));
        LayerSums { power, budget }
    }

    /// Groups members with `a_Q > 0` by layer and checks every layer.
    fn layers(&mut self, idx: &[usize], root: LatticeInterval) -> Vec<(u32, LayerSums)> {
        let mut by_k: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &i in idx {
            let a = &self.members[i].a;
            if a.is_positive() {
                by_k.entry(layer_of(a, &self.gamma)).or_default().push(i);
            }
        }
        by_k.into_iter().map(|(k, group)| (k, self.layer(&group, k, root))).collect()
    }
}

const COMMON_STEPS: &[&str] = &["eprime_level_set", "eprime_measure", "mweak", "exclusion", "restriction", "fw_root", "t_bound"];
const MAGIC_STEPS: [&str; 6] = ["magic_half", "magic_conclusion", "magic_disjoint", "layer_power", "magic_sum", "a1_step"];
const LAYER_STEPS: &[&str] = &[
    MAGIC_STEPS[0],
    MAGIC_STEPS[1],
    MAGIC_STEPS[2],
    MAGIC_STEPS[3],
    MAGIC_STEPS[4],
    MAGIC_STEPS[5],
    "drop_eprime",
    "layer_budget",
    "layer_bound",
];
const SLICE_STEPS: &[&str] = &[
    "geometric_constant",
    "holder_pointwise",
    "holder_integrated",
    "carleson",
    "carleson_slice",
    MAGIC_STEPS[0],
    MAGIC_STEPS[1],
    MAGIC_STEPS[2],
    MAGIC_STEPS[3],
    MAGIC_STEPS[4],
    MAGIC_STEPS[5],
    "layer_budget",
    "stopping_sum",
    "root_bound",
    "slice_ratio",
    "outer_holder",
    "norm_budget",
    "piece_bound",
    "piece_integral",
    "layer_cake",
];
const FINAL_STEPS: &[&str] = &["final", "final_universal"];

/// Runs the full chain on rescaled inputs.
pub fn verify_theorem(params: &TheoremParams, input: &TheoremInput, tol: f64) -> Result<PipelineTrace> {
    let TheoremInput { v, h, s, e } = input;
    let res = v.resolution();
    for found in [h.resolution(), s.resolution()] {
        if found != res {
            return Err(Error::ResolutionMismatch { expected: res.level(), found: found.level() });
        }
    }
    if e.cells().last().is_some_and(|&c| c >= res.cell_count()) {
        return param("E has cells outside the lattice");
    }
    let theta = params.theta();
    let beta = params.beta();
    let qr = params.q_over_r();
    let one_m_theta = Rat64::one() - theta;
    let grid = s.single_grid()?;
    let eta = params.eta();
    let s_eta = s.with_eta(eta.clone())?;
    let sp = verify_sparsity(&s_eta);
    if !sp.pass {
        return Err(Error::Sparsity { witness: sp.witness.map(|q| q.to_string()).unwrap_or_default() });
    }
    let g = normalised(h, v, theta, DEFAULT_TOL)?;
    let a1 = a1_constant(v, IntervalFamily::DyadicThreeGrids).value;
    let fw = fw_constant(v, FwMode::Dyadic).value;
    let fw_exact = (res.level() <= EXACT_FW_MAX_LEVEL).then(|| fw_constant(v, FwMode::Exact).value);
    let a1_pow = a1.pow(one_m_theta);
    let eta_val = eta.value();
    let mut tb = TraceBuilder::new(tol);

    // Reduction to E'.
    let ep = eprime(h, v, e, theta, grid, &a1, tol)?;
    let gamma = ep.gamma.clone();
    tb.report("eprime_level_set", ep.level_set.clone(), Real::frac(1, 6), None);
    tb.report("eprime_measure", ep.measure_bound.clone(), Real::frac(5, 6), None);
    tb.report("mweak", n_weak_check(h, v, theta, grid)?, a1_pow.clone(), None);

    // Per-member data and the exclusion of S \ S₊.
    let (pv, ph, pg) = (v.density().prefix(), h.prefix(), g.prefix());
    let v_on_eprime = v.density().restrict(&ep.set)?;
    let pe = v_on_eprime.prefix();
    let (t, t_prime) = params.holder_pair(&fw);
    let layer_exp = match params.branch() {
        Branch::Layers => rat_to_f64(qr),
        Branch::Slices => t,
    };
    let mut form = Real::zero();
    let mut form_plus = Real::zero();
    let mut members = Vec::new();
    for q in s.forest(grid).nodes.iter().copied() {
        let cells = q.cells();
        let (havg, vavg) = (ph.average(cells.clone()), pv.average(cells.clone()));
        let a = twisted(&havg, &vavg, theta);
        let ve = pe.integral(cells.clone());
        let term = havg.pow(qr) * (&ve / q.measure()).pow(beta) * q.measure();
        form = form + &term;
        if a > gamma {
            tb.check("exclusion", ve, Real::zero(), Real::one(), Some(TraceWitness::Interval(q)));
            continue;
        }
        form_plus = form_plus + &term;
        let vq = pv.integral(cells.clone());
        let b = (&ve / &vq).pow(beta);
        let a_qr = a.pow(qr);
        let a_pow = match params.branch() {
            Branch::Layers => a_qr.clone(),
            Branch::Slices => a.powf(t),
        };
        members.push(Member {
            q,
            hq: ph.integral(cells.clone()),
            gq: pg.integral(cells.clone()),
            vpow: vavg.pow(one_m_theta),
            vq,
            a,
            a_qr,
            a_pow,
            ve,
            b,
        });
    }
    tb.check_eq("restriction", form.clone(), form_plus.clone(), None);

    // t-policy.
    let e_const = Real::approx(std::f64::consts::E);
    tb.check_tol("fw_root", fw.powf(1.0 / t_prime), Real::approx(std::f64::consts::E + 1e-12), e_const, None, 0.0);
    tb.check_tol("t_bound", Real::approx(t), Real::int(2), Real::one(), None, 0.0);

    let ve_total = ep.measures.e.clone();
    let target_base = ve_total.powf(1.0 - rat_to_f64(qr)) * a1_pow.pow(qr);
    let n_members = members.len();
    let mut ctx = Context { members, gamma: gamma.clone(), a1_pow: a1_pow.clone(), layer_exp, tb: &mut tb };

    let (target, c_run, c_univ, pieces, geometric_reference) = match params.branch() {
        Branch::Layers => {
            let qr_f = rat_to_f64(qr);
            let all: Vec<usize> = (0..n_members).collect();
            let unit = s.forest(grid).nodes.first().copied().unwrap_or(res.unit());
            let layers = ctx.layers(&all, unit);
            let mut top = Real::zero();
            for &i in &all {
                top = top + &ctx.members[i].a_qr * &ctx.members[i].vq;
            }
            ctx.tb.check("drop_eprime", form_plus.clone(), top, Real::one(), None);
            let six = 6f64.powf(qr_f - 1.0);
            for (k, sums) in &layers {
                ctx.tb.check(
                    "layer_budget",
                    sums.budget.clone(),
                    Real::one(),
                    Real::one(),
                    Some(TraceWitness::Layer { k: *k, root: unit }),
                );
                let c = Real::approx(2.0 * six * 2f64.powf(-(qr_f - 1.0) * *k as f64));
                ctx.tb.check("layer_bound", sums.power.clone(), &c * &target_base, c, Some(TraceWitness::Layer { k: *k, root: unit }));
            }
            let c_star = 2.0 * six / (1.0 - 2f64.powf(-(qr_f - 1.0)));
            let conj = qr_f / (qr_f - 1.0);
            (target_base.clone(), c_star, c_star, 0, Some(conj.powf(qr_f)))
        }
        Branch::Slices => {
            let qr_f = rat_to_f64(qr);
            let beta_f = rat_to_f64(beta);
            let kappa = 1.0 - qr_f / t;
            let g_t = 1.0 / (1.0 - 2f64.powf(-(t - 1.0)));
            ctx.tb.check_tol("geometric_constant", Real::approx(g_t.powf(1.0 / t)), Real::approx(4.0 * t_prime), Real::int(4), None, 0.0);
            let eta_inv = eta_val.recip();
            let carleson_c = &eta_inv * &fw;
            let stop_c = gamma.powf(t - 1.0) * Real::approx(2.0 * g_t) * &a1_pow;
            let k_const = stop_c.powf(qr_f / t) * carleson_c.powf(kappa);
            let ve_kappa = ve_total.powf(kappa);
            let exponent = 1.0 - kappa / beta_f;

            let mut breaks: Vec<Real> = ctx.members.iter().map(|m| m.b.clone()).filter(Real::is_positive).collect();
            breaks.sort_by(|x, y| x.partial_cmp(y).expect("ordered"));
            breaks.dedup_by(|x, y| x == y);
            let mut cake = Real::zero();
            let mut lo = Real::zero();
            let mut carleson_cache: Vec<Option<(Real, Real)>> = vec![None; n_members];
            let subtree_sum = |members: &Vec<Member>, i: usize| -> Real {
                let q0 = members[i].q;
                s_eta.forest(grid).nodes.iter().filter(|q| q0.contains(q)).map(|q| pv.integral(q.cells())).sum()
            };
            for hi in &breaks {
                let active: Vec<usize> = (0..n_members).filter(|&i| ctx.members[i].b >= *hi).collect();
                let mut total = Real::zero();
                let mut outer_lhs = Real::zero();
                let (mut f_sum, mut v_sum) = (Real::zero(), Real::zero());
                let mut pos = 0;
                while pos < active.len() {
                    let r0 = active[pos];
                    let root = ctx.members[r0].q;
                    let mut end = pos + 1;
                    while end < active.len() && root.contains(&ctx.members[active[end]].q) {
                        end += 1;
                    }
                    let group = &active[pos..end];
                    pos = end;
                    let slice_wit = Some(TraceWitness::Slice { lambda: hi.clone(), root: Some(root) });
                    let m = &ctx.members;
                    let inner: Real = group.iter().map(|&i| &m[i].a_qr * &m[i].vq).sum();
                    let sum_at: Real = group.iter().map(|&i| &m[i].a_pow * &m[i].vq).sum();
                    let sum_v: Real = group.iter().map(|&i| m[i].vq.clone()).sum();
                    holder_pointwise(ctx.tb, m, group, root, qr_f, t, kappa);
                    let holder_rhs = sum_at.powf(qr_f / t) * sum_v.powf(kappa);
                    ctx.tb.check("holder_integrated", inner.clone(), holder_rhs, Real::one(), slice_wit.clone());
                    let (carl_sum, carl_bound) =
                        carleson_cache[r0].get_or_insert_with(|| (subtree_sum(m, r0), &carleson_c * &m[r0].vq)).clone();
                    ctx.tb.check("carleson", carl_sum.clone(), carl_bound.clone(), carleson_c.clone(), Some(TraceWitness::Interval(root)));
                    ctx.tb.check("carleson_slice", sum_v, carl_sum, Real::one(), slice_wit.clone());
                    let f_root = ctx.members[r0].gq.clone();
                    let layers = ctx.layers(group, root);
                    for (k, sums) in &layers {
                        ctx.tb.check(
                            "layer_budget",
                            sums.budget.clone(),
                            f_root.clone(),
                            Real::one(),
                            Some(TraceWitness::Layer { k: *k, root }),
                        );
                    }
                    let stop_bound = &stop_c * &f_root;
                    ctx.tb.check("stopping_sum", sum_at, stop_bound.clone(), stop_c.clone(), slice_wit.clone());
                    let root_bound = stop_bound.powf(qr_f / t) * carl_bound.powf(kappa);
                    ctx.tb.check("root_bound", inner.clone(), root_bound, Real::one(), slice_wit.clone());
                    let m0 = &ctx.members[r0];
                    ctx.tb.check("slice_ratio", hi.powf(1.0 / beta_f) * &m0.vq, m0.ve.clone(), Real::one(), slice_wit);
                    outer_lhs = outer_lhs + f_root.powf(qr_f / t) * m0.vq.powf(kappa);
                    f_sum = f_sum + f_root;
                    v_sum = v_sum + &m0.vq;
                    total = total + inner;
                }
                let piece_wit = Some(TraceWitness::Slice { lambda: hi.clone(), root: None });
                let outer_rhs = f_sum.powf(qr_f / t) * v_sum.powf(kappa);
                ctx.tb.check("outer_holder", outer_lhs, outer_rhs, Real::one(), piece_wit.clone());
                ctx.tb.check("norm_budget", f_sum, Real::one(), Real::one(), piece_wit.clone());
                let hi_f = hi.to_f64();
                let piece_bound = &k_const * Real::approx(hi_f.powf(-kappa / beta_f)) * &ve_kappa;
                ctx.tb.check("piece_bound", total.clone(), piece_bound, k_const.clone(), piece_wit.clone());
                let width = hi - &lo;
                let integral = Real::approx((hi_f.powf(exponent) - lo.to_f64().powf(exponent)) / exponent);
                let contribution = &width * &total;
                ctx.tb.check("piece_integral", contribution.clone(), &k_const * &ve_kappa * integral, k_const.clone(), piece_wit);
                cake = cake + contribution;
                lo = hi.clone();
            }
            ctx.tb.check_eq("layer_cake", cake, form_plus.clone(), None);

            let fw_f = fw.to_f64();
            let log_fw = 1.0 + fw_f.ln().max(0.0);
            let target = &target_base * fw.powf(1.0 - qr_f) * Real::approx(log_fw.powf(qr_f));
            let b_run = k_const.to_f64() * ve_kappa.to_f64() / exponent;
            let c_run = b_run / target.to_f64();
            let tp0 = params.t_prime_floor();
            let t_max = tp0 / (tp0 - 1.0);
            let kappa_max = 1.0 - qr_f / t_max;
            let c_univ = eta_inv.to_f64() * (8.0 * tp0).powf(qr_f) * 6f64.powf(qr_f / tp0) * std::f64::consts::E.powf(qr_f) * beta_f
                / (beta_f - kappa_max);
            (target, c_run, c_univ, breaks.len(), None)
        }
    };

    let target_f = target.to_f64();
    tb.check("final", form.clone(), Real::approx(c_run * target_f), Real::approx(c_run), None);
    tb.check("final_universal", form.clone(), Real::approx(c_univ * target_f), Real::approx(c_univ), None);
    let ratio = |x: f64| if form.is_zero() { 0.0 } else { form.to_f64() / x };
    let summary = TraceSummary {
        branch: match params.branch() {
            Branch::Layers => "q>r",
            Branch::Slices => "q<=r",
        },
        final_ratio: ratio(target_f),
        bound_ratio: ratio(c_run * target_f),
        t,
        t_prime,
        gamma,
        measures: ep.measures,
        form,
        target,
        c_star_run: c_run,
        c_star_univ: c_univ,
        a1,
        fw_dyadic: fw,
        fw_exact,
        eta: eta_val,
        members: n_members,
        pieces,
        geometric_reference,
    };
    let order: Vec<&'static str> = match params.branch() {
        Branch::Layers => [COMMON_STEPS, LAYER_STEPS, FINAL_STEPS].concat(),
        Branch::Slices => [COMMON_STEPS, SLICE_STEPS, FINAL_STEPS].concat(),
    };
    Ok(tb.finish(summary, &order))
}

/// `Σ a^{q/r} 1_Q ≤ (Σ a^t 1_Q)^{q/(rt)} (Σ 1_Q)^{1−q/(rt)}` on every cell of the root.
fn holder_pointwise(tb: &mut TraceBuilder, m: &[Member], group: &[usize], root: LatticeInterval, qr: f64, t: f64, kappa: f64) {
    let base = root.start();
    let len = root.len();
    let mut diff = vec![[0.0f64; 3]; len + 1];
    for &i in group {
        let q = m[i].q;
        let vals = [m[i].a_qr.to_f64(), m[i].a_pow.to_f64(), 1.0];
        for (c, v) in vals.iter().enumerate() {
            diff[q.start() - base][c] += v;
            diff[q.end() - base][c] -= v;
        }
    }
    let mut acc = [0.0f64; 3];
    let mut worst: Option<(f64, f64, usize)> = None;
    for (x, d) in diff.iter().take(len).enumerate() {
        for c in 0..3 {
            acc[c] += d[c];
        }
        if acc[2] < 0.5 {
            continue;
        }
        let rhs = acc[1].max(0.0).powf(qr / t) * acc[2].powf(kappa);
        let bad = |l: f64, r: f64| if l == 0.0 { 0.0 } else { l / r };
        if worst.is_none_or(|(l, r, _)| bad(acc[0], rhs) > bad(l, r)) {
            worst = Some((acc[0], rhs, x + base));
        }
    }
    if let Some((l, r, x)) = worst {
        tb.check("holder_pointwise", Real::approx(l), Real::approx(r), Real::one(), Some(TraceWitness::Cells { start: x, end: x + 1 }));
    }
}
