//! Sparse collections, sparse operators and forms, and the disjointness
//! ("magic") selection.

use std::collections::BTreeMap;
use std::fmt;

use num::traits::{One, Zero};
use num::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::error::{param, Error, Result};
use crate::gridfn::{average, CellSet, GridFunction};
use crate::lattice::{GridId, IntervalLiteral, LatticeInterval, Resolution};
use crate::maximal::twisted;
use crate::real::{format_big, parse_big, parse_rat64, Exponent, Rat64, Real, DEFAULT_TOL};
use crate::weights::{fw_constant, FwMode, Weight};

/// A sparseness parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Eta {
    Value(BigRational),
    /// `η` with `1 − η = ((1−θ)/4)^{1/(1−θ)}`, the hypothesis of the
    /// disjointness lemma; irrational for most `θ`, so it is kept symbolic.
    MagicThreshold(Rat64),
}

impl Eta {
    pub fn rational(num: i64, den: i64) -> Self {
        Eta::Value(BigRational::new(num.into(), den.into()))
    }

    pub fn magic(theta: Rat64) -> Result<Self> {
        if theta < Rat64::zero() || theta >= Rat64::one() {
            return param(format!("magic threshold needs 0 ≤ θ < 1, got {theta}"));
        }
        Ok(Eta::MagicThreshold(theta))
    }

    /// `1 − η`, the admissible children fraction.
    pub fn budget(&self) -> Real {
        match self {
            Eta::Value(e) => Real::Exact(BigRational::one() - e),
            Eta::MagicThreshold(t) => {
                let a = Rat64::one() - *t;
                (Real::from_rat64(a) / Real::int(4)).pow(a.recip())
            }
        }
    }

    pub fn value(&self) -> Real {
        Real::one() - self.budget()
    }

    /// Whether a children fraction `x = Σ|Q'|/|Q|` is at most `1 − η`, exactly.
    pub fn admits(&self, x: &BigRational) -> bool {
        match self {
            Eta::Value(e) => *x <= BigRational::one() - e,
            Eta::MagicThreshold(t) => {
                // x^{1−θ} ≤ (1−θ)/4  ⇔  x^a ≤ ((1−θ)/4)^b with 1−θ = a/b
                let a = Rat64::one() - *t;
                let c = BigRational::new((*a.numer()).into(), (*a.denom() * 4).into());
                let (na, nb) = (*a.numer() as i32, *a.denom() as i32);
                num::pow::pow(x.clone(), na as usize) <= num::pow::pow(c, nb as usize)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Eta::Value(e) = self {
            if !(e > &BigRational::zero() && e < &BigRational::one()) {
                return param(format!("η must lie in (0,1), got {}", format_big(e)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Value(e) => f.write_str(&format_big(e)),
            Eta::MagicThreshold(t) => write!(f, "magic:{t}"),
        }
    }
}

impl std::str::FromStr for Eta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("magic:") {
            Some(t) => Eta::magic(parse_rat64(t)?),
            None => {
                let e = Eta::Value(parse_big(s)?);
                e.validate()?;
                Ok(e)
            }
        }
    }
}

/// Containment forest of the members of one grid.
#[derive(Clone, Debug)]
pub struct Forest {
    /// Members in pre-order (by start, longer first).
    pub nodes: Vec<LatticeInterval>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

impl Forest {
    pub fn new(mut nodes: Vec<LatticeInterval>) -> Self {
        nodes.sort_by(|a, b| a.start().cmp(&b.start()).then(b.len().cmp(&a.len())));
        nodes.dedup();
        let mut parent = vec![None; nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..nodes.len() {
            while let Some(&top) = stack.last() {
                if nodes[top].contains(&nodes[i]) {
                    break;
                }
                stack.pop();
            }
            if let Some(&top) = stack.last() {
                parent[i] = Some(top);
                children[top].push(i);
            }
            stack.push(i);
        }
        Forest { nodes, parent, children }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total length in cells of the children of node `i`.
    pub fn children_cells(&self, i: usize) -> usize {
        self.children[i].iter().map(|&c| self.nodes[c].len()).sum()
    }

    /// `Q \ ∪ ch(Q)` as maximal runs of cells.
    pub fn e_runs(&self, i: usize) -> Vec<std::ops::Range<usize>> {
        let q = self.nodes[i];
        let mut runs = Vec::with_capacity(self.children[i].len() + 1);
        let mut pos = q.start();
        for &c in &self.children[i] {
            let ch = self.nodes[c];
            if ch.start() > pos {
                runs.push(pos..ch.start());
            }
            pos = pos.max(ch.end());
        }
        if q.end() > pos {
            runs.push(pos..q.end());
        }
        runs
    }

    /// `Q \ ∪ ch(Q)` as a cell set.
    pub fn e_set(&self, i: usize) -> CellSet {
        CellSet::from_sorted(self.e_runs(i).into_iter().flatten().collect())
    }

    /// Indices of members contained in node `i` (including `i`), via pre-order.
    pub fn subtree(&self, i: usize) -> std::ops::Range<usize> {
        let q = self.nodes[i];
        let mut end = i + 1;
        while end < self.nodes.len() && q.contains(&self.nodes[end]) {
            end += 1;
        }
        i..end
    }
}

/// Per-grid families of grid intervals with a single sparseness parameter.
#[derive(Clone, Debug)]
pub struct SparseCollection {
    res: Resolution,
    eta: Eta,
    forests: [Forest; 3],
}

impl SparseCollection {
    pub fn new(res: Resolution, eta: Eta, intervals: impl IntoIterator<Item = LatticeInterval>) -> Result<Self> {
        eta.validate()?;
        let mut per: [Vec<LatticeInterval>; 3] = Default::default();
        for q in intervals {
            if q.end() > res.cell_count() || q.scale() > res.level() {
                return param(format!("interval {q} does not belong to resolution L={}", res.level()));
            }
            per[q.grid().index()].push(q);
        }
        let [a, b, c] = per;
        Ok(SparseCollection { res, eta, forests: [Forest::new(a), Forest::new(b), Forest::new(c)] })
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn eta(&self) -> &Eta {
        &self.eta
    }

    pub fn with_eta(&self, eta: Eta) -> Result<Self> {
        eta.validate()?;
        Ok(SparseCollection { eta, ..self.clone() })
    }

    pub fn forest(&self, grid: GridId) -> &Forest {
        &self.forests[grid.index()]
    }

    pub fn len(&self) -> usize {
        self.forests.iter().map(Forest::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All members, grid by grid, each grid in pre-order.
    pub fn intervals(&self) -> impl Iterator<Item = LatticeInterval> + '_ {
        self.forests.iter().flat_map(|f| f.nodes.iter().copied())
    }

    /// The grids with at least one member.
    pub fn grids(&self) -> Vec<GridId> {
        GridId::ALL.into_iter().filter(|g| !self.forest(*g).is_empty()).collect()
    }

    /// The sub-collection of one grid.
    pub fn restrict_grid(&self, grid: GridId) -> SparseCollection {
        let mut forests: [Forest; 3] = [Forest::new(vec![]), Forest::new(vec![]), Forest::new(vec![])];
        forests[grid.index()] = self.forest(grid).clone();
        SparseCollection { res: self.res, eta: self.eta.clone(), forests }
    }

    /// Keeps the members satisfying `keep` (children are recomputed).
    pub fn filter(&self, mut keep: impl FnMut(&LatticeInterval) -> bool) -> SparseCollection {
        let kept: Vec<LatticeInterval> = self.intervals().filter(|q| keep(q)).collect();
        SparseCollection::new(self.res, self.eta.clone(), kept).expect("members of a valid collection")
    }

    /// The single grid of a one-grid collection.
    pub fn single_grid(&self) -> Result<GridId> {
        match self.grids().as_slice() {
            [g] => Ok(*g),
            [] => Ok(GridId::Zero),
            _ => param("operation requires a single-grid sparse collection"),
        }
    }

    pub fn to_json(&self) -> SparseCollectionJson {
        let mut grids = BTreeMap::new();
        for g in GridId::ALL {
            let mut members: Vec<(u32, i64)> = self.forest(g).nodes.iter().map(|q| (q.scale(), q.translation())).collect();
            members.sort();
            grids.insert(g.label().to_string(), members);
        }
        SparseCollectionJson { eta: self.eta.to_string(), grids }
    }

    pub fn from_json(res: Resolution, json: &SparseCollectionJson) -> Result<Self> {
        let eta: Eta = json.eta.parse().map_err(|e: Error| Error::Malformed(e.to_string()))?;
        let mut all = Vec::new();
        for (label, members) in &json.grids {
            for &(j, k) in members {
                let lit = IntervalLiteral { alpha: label.clone(), j, k };
                all.push(LatticeInterval::from_literal(&res, &lit).map_err(|e| Error::Malformed(e.to_string()))?);
            }
        }
        SparseCollection::new(res, eta, all)
    }
}

/// `{"eta": "num/den", "grids": {"0": [[j,k],…], "1/3": […], "2/3": […]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseCollectionJson {
    pub eta: String,
    pub grids: BTreeMap<String, Vec<(u32, i64)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SparsityReport {
    pub pass: bool,
    /// The first member violating the children condition.
    pub witness: Option<LatticeInterval>,
    /// `(Q, E_Q)` for every member, when the collection passes.
    #[serde(skip)]
    pub e_sets: Vec<(LatticeInterval, CellSet)>,
}

/// Checks `Σ_{ch(Q)} |Q'| ≤ (1−η)|Q|` for every member, and on success the
/// disjointness of the `E_Q` and `|E_Q| ≥ η|Q|`.
pub fn verify_sparsity(s: &SparseCollection) -> SparsityReport {
    for g in GridId::ALL {
        let forest = s.forest(g);
        for (i, q) in forest.nodes.iter().enumerate() {
            let x = BigRational::new(forest.children_cells(i).into(), q.len().into());
            if !s.eta.admits(&x) {
                return SparsityReport { pass: false, witness: Some(*q), e_sets: vec![] };
            }
        }
    }
    let n = s.res.cell_count();
    let mut e_sets = Vec::with_capacity(s.len());
    for g in GridId::ALL {
        let forest = s.forest(g);
        let mut owner = vec![false; n];
        for (i, q) in forest.nodes.iter().enumerate() {
            let e = forest.e_set(i);
            let share = BigRational::new((q.len() - e.len()).into(), q.len().into());
            let disjoint = e.iter().all(|c| !std::mem::replace(&mut owner[c], true));
            if !disjoint || !s.eta.admits(&share) {
                return SparsityReport { pass: false, witness: Some(*q), e_sets: vec![] };
            }
            e_sets.push((*q, e));
        }
    }
    SparsityReport { pass: true, witness: None, e_sets }
}

/// Principal intervals: `Q0` and, recursively, the maximal `Q' ⊊ Q` of the
/// same grid with `⟨f⟩_{Q'} > c⟨f⟩_Q`. The result is `(1 − 1/c)`-sparse.
pub fn stopping_time_sparse(f: &GridFunction, grid: GridId, c: Rat64, root: LatticeInterval) -> Result<SparseCollection> {
    if c <= Rat64::one() {
        return param(format!("stopping factor must exceed 1, got {c}"));
    }
    if root.grid() != grid {
        return param("root must belong to the requested grid");
    }
    let res = f.resolution();
    let pf = f.prefix();
    if !pf.sum(root.cells()).is_positive() {
        return param("f vanishes on the root interval");
    }
    let cr = Real::from_rat64(c);
    let mut out = vec![root];
    let mut stack = vec![root];
    while let Some(top) = stack.pop() {
        let threshold = &cr * pf.average(top.cells());
        let mut frontier: Vec<LatticeInterval> = top.children(&res).map(|c| c.to_vec()).unwrap_or_default();
        while let Some(q) = frontier.pop() {
            if pf.average(q.cells()) > threshold {
                out.push(q);
                stack.push(q);
            } else if let Ok(ch) = q.children(&res) {
                frontier.extend(ch);
            }
        }
    }
    SparseCollection::new(res, Eta::Value(BigRational::one() - BigRational::new((*c.denom()).into(), (*c.numer()).into())), out)
}

/// Random single-grid collection in which every member's children cover at
/// most `budget·|Q|`. Children sit at depth `≥ ⌈log2(1/budget)⌉` below their parent.
pub fn random_sparse<R: Rng>(rng: &mut R, res: Resolution, grid: GridId, budget: Rat64, max_size: usize) -> Result<SparseCollection> {
    if budget <= Rat64::zero() || budget >= Rat64::one() {
        return param(format!("children budget must lie in (0,1), got {budget}"));
    }
    let mut depth = 0u32;
    while Rat64::new(1, 1 << depth) > budget {
        depth += 1;
    }
    let l = res.level();
    let roots: Vec<LatticeInterval> = (0..=l)
        .find_map(|j| {
            let v: Vec<_> = res.intervals_at(grid, j).collect();
            (!v.is_empty()).then_some(v)
        })
        .unwrap_or_default();
    let mut out: Vec<LatticeInterval> = Vec::new();
    let mut queue: std::collections::VecDeque<LatticeInterval> = roots.into_iter().collect();
    while let Some(q) = queue.pop_front() {
        if out.len() >= max_size {
            break;
        }
        out.push(q);
        let d = depth + rng.gen_range(0..=1);
        if q.scale() + d > l {
            continue;
        }
        // number of depth-d descendants allowed by the budget
        let slots = 1i64 << d;
        let cap = (budget * Rat64::from_integer(slots)).floor().to_integer();
        let want = rng.gen_range(0..=cap.min(3));
        let base = q.translation() << d;
        let mut picks: Vec<i64> = Vec::new();
        while (picks.len() as i64) < want {
            let k = base + rng.gen_range(0..slots);
            if !picks.contains(&k) {
                picks.push(k);
            }
        }
        picks.sort();
        for k in picks {
            queue.push_back(res.interval(grid, q.scale() + d, k)?);
        }
    }
    let eta = Eta::Value(BigRational::one() - BigRational::new((*budget.numer()).into(), (*budget.denom()).into()));
    SparseCollection::new(res, eta, out)
}

/// Positive coefficients `a_Q` indexed by intervals.
#[derive(Clone, Debug, Default)]
pub struct CoefficientFamily(BTreeMap<LatticeInterval, Real>);

impl CoefficientFamily {
    pub fn new(entries: impl IntoIterator<Item = (LatticeInterval, Real)>) -> Result<Self> {
        let map: BTreeMap<_, _> = entries.into_iter().collect();
        if map.values().any(|a| !a.is_positive()) {
            return param("coefficients must be positive");
        }
        Ok(CoefficientFamily(map))
    }

    pub fn get(&self, q: &LatticeInterval) -> Option<&Real> {
        self.0.get(q)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeInterval, &Real)> {
        self.0.iter()
    }
}

/// `Σ_Q value(Q)·1_Q` by a difference array. Cells covered by no interval
/// get an exact zero, so floating-point residue never leaks outside the support.
pub(crate) fn indicator_sum(res: &Resolution, terms: impl Iterator<Item = (LatticeInterval, Real)>) -> Vec<Real> {
    let n = res.cell_count();
    let mut diff = vec![Real::zero(); n + 1];
    let mut active = vec![0i64; n + 1];
    for (q, v) in terms {
        diff[q.start()] = &diff[q.start()] + &v;
        diff[q.end()] = &diff[q.end()] - &v;
        active[q.start()] += 1;
        active[q.end()] -= 1;
    }
    let (mut acc, mut count) = (Real::zero(), 0i64);
    diff.into_iter()
        .zip(active)
        .take(n)
        .map(|(d, a)| {
            count += a;
            acc = if count == 0 { Real::zero() } else { (&acc + d).max(Real::zero()) };
            acc.clone()
        })
        .collect()
}

/// `(Σ_Q a_Q^q 1_Q)^{1/q}`.
pub fn coefficient_operator(s: &SparseCollection, a: &CoefficientFamily, q: Rat64) -> Result<GridFunction> {
    if q <= Rat64::zero() {
        return param("ℓ^q exponent must be positive");
    }
    let terms = s
        .intervals()
        .map(|iq| {
            let c = a.get(&iq).ok_or_else(|| Error::Parameter(format!("missing coefficient for {iq}")))?;
            Ok((iq, c.pow(q)))
        })
        .collect::<Result<Vec<_>>>()?;
    let sums = indicator_sum(&s.resolution(), terms.into_iter());
    GridFunction::from_reals(s.resolution(), sums.into_iter().map(|v| v.pow(q.recip())).collect())
}

/// `A^q_{r,S} f = (Σ_Q ⟨f⟩_{r,Q}^q 1_Q)^{1/q}`.
pub fn sparse_operator(s: &SparseCollection, f: &GridFunction, r: Rat64, q: Rat64) -> Result<GridFunction> {
    if r <= Rat64::zero() {
        return param("average exponent must be positive");
    }
    let coeffs = s.intervals().map(|iq| Ok((iq, average(f, Exponent::Finite(r), &iq)?))).collect::<Result<Vec<_>>>()?;
    if q <= Rat64::zero() {
        return param("ℓ^q exponent must be positive");
    }
    let sums = indicator_sum(&s.resolution(), coeffs.into_iter().map(|(iq, v)| (iq, v.pow(q))));
    GridFunction::from_reals(s.resolution(), sums.into_iter().map(|v| v.pow(q.recip())).collect())
}

/// `(Σ_Q ⟨f⟩^q_{r,Q} ⟨g⟩_{(s/q)',Q} |Q|)^{1/q}`.
pub fn bilinear_form(s: &SparseCollection, f: &GridFunction, g: &GridFunction, r: Rat64, sx: Exponent, q: Rat64) -> Result<Real> {
    if q <= Rat64::zero() || r <= Rat64::zero() || q.recip() <= sx.recip() {
        return param(format!("bilinear form requires 0 < q < s, got q={q}, s={sx}"));
    }
    // (s/q)' with (∞)' = 1
    let g_exp = match sx {
        Exponent::Infinite => Rat64::one(),
        Exponent::Finite(sv) => {
            let x = sv / q;
            x / (x - Rat64::one())
        }
    };
    let mut total = Real::zero();
    for iq in s.intervals() {
        let fa = average(f, Exponent::Finite(r), &iq)?;
        let ga = average(g, Exponent::Finite(g_exp), &iq)?;
        total = total + fa.pow(q) * ga * iq.measure();
    }
    Ok(total.pow(q.recip()))
}

/// Outcome of the disjointness selection.
#[derive(Clone, Debug, Serialize)]
pub struct MagicOutcome {
    /// The selected family `E`.
    pub selected: Vec<LatticeInterval>,
    /// `E_Q = Q \ ∪ ch_E(Q)`, aligned with `selected`.
    #[serde(skip)]
    pub e_sets: Vec<CellSet>,
    pub disjoint: bool,
    /// Worst instance of `Σ_{ch_E(Q)} ∫_{Q'} f ≤ ½ ∫_Q f`.
    pub half: CheckReport,
    /// Worst instance of `∫_Q f ≤ 2 ∫_{E_Q} f`.
    pub conclusion: CheckReport,
    pub pass: bool,
}

/// Checks the lemma hypothesis `Σ_{ch_S(Q)} |Q'| ≤ ((1−θ)/4)^{1/(1−θ)} |Q|` exactly.
pub fn magic_hypothesis(s: &SparseCollection, theta: Rat64) -> Result<()> {
    let eta = Eta::magic(theta)?;
    for g in GridId::ALL {
        let forest = s.forest(g);
        for (i, q) in forest.nodes.iter().enumerate() {
            let x = BigRational::new(forest.children_cells(i).into(), q.len().into());
            if !eta.admits(&x) {
                return Err(Error::Hypothesis { witness: q.to_string() });
            }
        }
    }
    Ok(())
}

/// Selects `E = {Q : λ⟨w⟩^θ < ⟨f⟩ ≤ 2λ⟨w⟩^θ}` and checks the disjointness lemma.
pub fn magic_selection(s: &SparseCollection, f: &GridFunction, w: &Weight, lambda: &Real, theta: Rat64) -> Result<MagicOutcome> {
    let grid = s.single_grid()?;
    magic_hypothesis(s, theta)?;
    if !lambda.is_positive() {
        return param("λ must be positive");
    }
    let (pf, pw) = (f.prefix(), w.density().prefix());
    let selected: Vec<LatticeInterval> = s
        .forest(grid)
        .nodes
        .iter()
        .copied()
        .filter(|q| {
            let fa = pf.average(q.cells());
            let lw = twisted(lambda, &pw.average(q.cells()), -theta);
            lw < fa && fa <= Real::int(2) * &lw
        })
        .collect();
    Ok(magic_check(f, selected))
}

/// The lemma's conclusions for a given selected family.
pub(crate) fn magic_check(f: &GridFunction, selected: Vec<LatticeInterval>) -> MagicOutcome {
    let pf = f.prefix();
    let forest = Forest::new(selected);
    let two = Real::int(2);
    let mut half = CheckReport::le(Real::zero(), Real::zero(), DEFAULT_TOL);
    let mut conclusion = CheckReport::le(Real::zero(), Real::zero(), DEFAULT_TOL);
    let mut runs_all = Vec::new();
    let mut e_sets = Vec::with_capacity(forest.len());
    for (i, q) in forest.nodes.iter().enumerate() {
        let runs = forest.e_runs(i);
        let whole = pf.sum(q.cells());
        let kids: Real = forest.children[i].iter().map(|&c| pf.sum(forest.nodes[c].cells())).sum();
        let h = CheckReport::le(kids, &whole / &two, DEFAULT_TOL);
        let own: Real = runs.iter().map(|r| pf.sum(r.clone())).sum();
        let cc = CheckReport::le(whole, &two * own, DEFAULT_TOL);
        half = worse(half, h);
        conclusion = worse(conclusion, cc);
        e_sets.push(CellSet::from_sorted(runs.iter().cloned().flatten().collect()));
        runs_all.extend(runs);
    }
    runs_all.sort_by_key(|r| r.start);
    let disjoint = runs_all.windows(2).all(|w| w[0].end <= w[1].start);
    let pass = disjoint && half.pass && conclusion.pass;
    MagicOutcome { selected: forest.nodes, e_sets, disjoint, half, conclusion, pass }
}

/// The failing or higher-ratio report of the two.
pub(crate) fn worse(a: CheckReport, b: CheckReport) -> CheckReport {
    if (a.pass && !b.pass) || (a.pass == b.pass && b.ratio() > a.ratio()) {
        b
    } else {
        a
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CarlesonReport {
    pub sum: Real,
    pub bound: Real,
    pub ratio: f64,
    pub pass: bool,
}

/// `Σ_{Q ∈ S, Q ⊆ Q0} w(Q) ≤ η^{-1} [w]_FW w(Q0)` with the dyadic Fujii–Wilson constant.
pub fn carleson_sum(s: &SparseCollection, w: &Weight, q0: &LatticeInterval) -> Result<CarlesonReport> {
    let fw = fw_constant(w, FwMode::Dyadic).value;
    carleson_with(s, w, q0, &fw)
}

pub(crate) fn carleson_with(s: &SparseCollection, w: &Weight, q0: &LatticeInterval, fw: &Real) -> Result<CarlesonReport> {
    let forest = s.forest(q0.grid());
    let i = forest.nodes.iter().position(|q| q == q0).ok_or_else(|| Error::Parameter(format!("{q0} is not a member of the collection")))?;
    let sum: Real = forest.subtree(i).map(|j| w.measure_of(&forest.nodes[j])).sum();
    let bound = s.eta().value().recip() * fw * w.measure_of(q0);
    let rep = CheckReport::le(sum, bound, DEFAULT_TOL);
    Ok(CarlesonReport { ratio: rep.ratio(), pass: rep.pass, sum: rep.lhs, bound: rep.rhs })
}
