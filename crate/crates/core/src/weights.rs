//! Weights and their characteristics: `[w]_1`, `[w]_{p,(r,s)}`, the
//! Fujii–Wilson constant, and the limited-range rescaling `w ↦ w_{r,s}`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num::traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::field::{prefix_sums, Field};
use crate::gridfn::{dispatch, CellSet, GridFunction};
use crate::lattice::{GridId, LatticeInterval, Resolution};
use crate::maximal::engine::best_intervals;
use crate::real::{rat_to_f64, Exponent, Rat64, Real};

/// A strictly positive grid function.
#[derive(Clone, Debug)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(density: GridFunction) -> Result<Self> {
        if !density.is_strictly_positive() {
            return param("a weight must be strictly positive on every cell");
        }
        Ok(Weight(density))
    }

    pub fn constant(res: Resolution) -> Self {
        Weight(GridFunction::from_integers(res, vec![1; res.cell_count()], 1).expect("valid constant"))
    }

    pub fn density(&self) -> &GridFunction {
        &self.0
    }

    pub fn resolution(&self) -> Resolution {
        self.0.resolution()
    }

    /// `w(Q)` for a cell range.
    pub fn measure(&self, cells: Range<usize>) -> Real {
        self.0.integral(cells)
    }

    pub fn measure_of(&self, q: &LatticeInterval) -> Real {
        self.0.integral(q.cells())
    }

    pub fn measure_set(&self, set: &CellSet) -> Real {
        let res = self.resolution();
        set.iter().map(|c| self.0.value(c)).sum::<Real>() * res.cell_measure()
    }

    /// `w^e`, exact for integer `e`.
    pub fn pow(&self, e: Rat64) -> Result<Weight> {
        Weight::new(self.0.pow(e)?)
    }

    pub fn scale(&self, c: &Real) -> Result<Weight> {
        Weight::new(self.0.scale(c)?)
    }
}

/// Interval families over which characteristic suprema are taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalFamily {
    /// Every in-domain interval of the three grids.
    DyadicThreeGrids,
    /// Every `[a, b)` with lattice endpoints.
    AllLatticeIntervals,
}

impl FromStr for IntervalFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyadic" | "dyadic-three-grids" => Ok(IntervalFamily::DyadicThreeGrids),
            "all" | "all-lattice-intervals" => Ok(IntervalFamily::AllLatticeIntervals),
            _ => Err(Error::Parameter(format!("unknown interval family {s:?}"))),
        }
    }
}

/// The interval attaining a supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Dyadic(LatticeInterval),
    Cells { start: usize, end: usize },
}

impl Witness {
    pub fn cells(&self) -> Range<usize> {
        match self {
            Witness::Dyadic(q) => q.cells(),
            Witness::Cells { start, end } => *start..*end,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Dyadic(q) => q.fmt(f),
            Witness::Cells { start, end } => write!(f, "cells[{start},{end})"),
        }
    }
}

/// A characteristic value with the interval that attains it.
#[derive(Clone, Debug, Serialize)]
pub struct Characteristic {
    pub value: Real,
    pub witness: Witness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FwMode {
    /// Dyadic maximal operator of the interval's own grid.
    Dyadic,
    /// Uncentred maximal operator over all lattice intervals.
    Exact,
}

/// A ratio candidate `num/den` (both in raw storage units).
struct Cand<T> {
    num: T,
    den: T,
    witness: Witness,
}

impl<T: Field> Cand<T> {
    fn beats(&self, other: &Cand<T>) -> bool {
        let (l, r) = (self.num.clone() * other.den.clone(), other.num.clone() * self.den.clone());
        l > r || (l == r && witness_key(&self.witness) < witness_key(&other.witness))
    }
}

fn witness_key(w: &Witness) -> (u32, i64, usize, usize) {
    match w {
        Witness::Dyadic(q) => (q.scale(), q.translation(), q.grid().index(), 0),
        Witness::Cells { start, end } => (0, 0, *start, *end),
    }
}

fn pick<T: Field>(a: Cand<T>, b: Cand<T>) -> Cand<T> {
    if b.beats(&a) {
        b
    } else {
        a
    }
}

/// Per-grid bottom-up tables: `levels[j][k - k_lo(j)]`.
pub(crate) struct GridTable<T> {
    pub(crate) grid: GridId,
    pub(crate) k_lo: Vec<i64>,
    pub(crate) levels: Vec<Vec<T>>,
}

impl<T: Clone> GridTable<T> {
    /// Builds a table by combining children, starting from `leaf` on scale-`L` intervals.
    pub(crate) fn build(res: &Resolution, grid: GridId, leaf: impl Fn(&LatticeInterval) -> T, combine: impl Fn(&T, &T) -> T) -> Self {
        let l = res.level();
        let k_lo: Vec<i64> = (0..=l).map(|j| res.k_range(grid, j).start).collect();
        let mut levels: Vec<Vec<T>> = vec![Vec::new(); l as usize + 1];
        levels[l as usize] = res.intervals_at(grid, l).map(|q| leaf(&q)).collect();
        for j in (0..l).rev() {
            let (ju, cu) = (j as usize, j as usize + 1);
            let row: Vec<T> = res
                .k_range(grid, j)
                .map(|k| {
                    let c = (2 * k - k_lo[cu]) as usize;
                    combine(&levels[cu][c], &levels[cu][c + 1])
                })
                .collect();
            levels[ju] = row;
        }
        GridTable { grid, k_lo, levels }
    }

    pub(crate) fn get(&self, j: u32, k: i64) -> &T {
        &self.levels[j as usize][(k - self.k_lo[j as usize]) as usize]
    }

    pub(crate) fn iter(&self, res: &Resolution) -> impl Iterator<Item = (LatticeInterval, &T)> + '_ {
        let res = *res;
        self.levels.iter().enumerate().flat_map(move |(j, row)| {
            row.iter().enumerate().map(move |(i, v)| {
                let q = res.interval(self.grid, j as u32, self.k_lo[j] + i as i64).expect("table interval");
                (q, v)
            })
        })
    }
}

fn a1_raw<T: Field>(v: &[T], res: &Resolution, family: IntervalFamily) -> Cand<T> {
    match family {
        IntervalFamily::DyadicThreeGrids => {
            let mut best: Option<Cand<T>> = None;
            for grid in GridId::ALL {
                let table = GridTable::build(
                    res,
                    grid,
                    |q| {
                        let c = q.cells();
                        let s = v[c.clone()].iter().cloned().fold(T::zero(), |a, b| a + b);
                        let m = v[c].iter().cloned().reduce(|a, b| if b < a { b } else { a }).expect("nonempty");
                        (s, m)
                    },
                    |a, b| (a.0.clone() + b.0.clone(), if b.1 < a.1 { b.1.clone() } else { a.1.clone() }),
                );
                for (q, (s, m)) in table.iter(res) {
                    let cand = Cand { num: s.clone(), den: m.clone() * T::from_usize(q.len()), witness: Witness::Dyadic(q) };
                    best = Some(match best {
                        None => cand,
                        Some(b) => pick(b, cand),
                    });
                }
            }
            best.expect("the unit interval is always present")
        }
        IntervalFamily::AllLatticeIntervals => {
            let n = v.len();
            (0..n)
                .into_par_iter()
                .map(|a| {
                    let mut s = T::zero();
                    let mut m = v[a].clone();
                    let mut best: Option<Cand<T>> = None;
                    for b in a + 1..=n {
                        s = s + v[b - 1].clone();
                        if v[b - 1] < m {
                            m = v[b - 1].clone();
                        }
                        let cand =
                            Cand { num: s.clone(), den: m.clone() * T::from_usize(b - a), witness: Witness::Cells { start: a, end: b } };
                        best = Some(match best {
                            None => cand,
                            Some(x) => pick(x, cand),
                        });
                    }
                    best.expect("nonempty")
                })
                .reduce_with(pick)
                .expect("nonempty domain")
        }
    }
}

/// `[w]_1 = sup_Q ⟨w⟩_{1,Q} ⟨w^{-1}⟩_{∞,Q}`, exact.
pub fn a1_constant(w: &Weight, family: IntervalFamily) -> Characteristic {
    let res = w.resolution();
    dispatch!(w.density().store(), v, _scale => {
        let c = a1_raw(v, &res, family);
        Characteristic { value: c.num.to_real() / c.den.to_real(), witness: c.witness }
    })
}

/// `[w]_p = [w]_{p,(1,∞)}`.
pub fn ap_constant(w: &Weight, p: Rat64, family: IntervalFamily) -> Result<Characteristic> {
    aprs_constant(w, p, Rat64::one(), Exponent::Infinite, family)
}

/// `[w]_{p,(r,s)} = sup_Q ⟨w⟩_{1/(1/p−1/s),Q} ⟨w^{-1}⟩_{1/(1/r−1/p),Q}`.
///
/// Exact when it reduces to `[w]_1`; otherwise evaluated in floating point
/// from running sums of positive terms.
pub fn aprs_constant(w: &Weight, p: Rat64, r: Rat64, s: Exponent, family: IntervalFamily) -> Result<Characteristic> {
    let inv_s = s.recip();
    if !(r > Rat64::zero() && r <= p && p.recip() > inv_s) {
        return param(format!("[w]_(p,(r,s)) requires 0 < r ≤ p < s, got p={p}, r={r}, s={s}"));
    }
    let inv_e1 = p.recip() - inv_s;
    let inv_e2 = r.recip() - p.recip();
    if inv_e1 == Rat64::one() && inv_e2.is_zero() {
        return Ok(a1_constant(w, family));
    }
    let (ie1, ie2) = (rat_to_f64(inv_e1), rat_to_f64(inv_e2));
    let wv = w.density().to_f64_vec();
    let x: Vec<f64> = wv.iter().map(|t| t.powf(1.0 / ie1)).collect();
    let y: Vec<f64> = if ie2 == 0.0 { wv.iter().map(|t| t.recip()).collect() } else { wv.iter().map(|t| t.powf(-1.0 / ie2)).collect() };
    let eval = |sx: f64, sy: f64, len: f64| -> f64 {
        let first = (sx / len).powf(ie1);
        let second = if ie2 == 0.0 { sy } else { (sy / len).powf(ie2) };
        first * second
    };
    let res = w.resolution();
    let better = |a: &(f64, Witness), b: &(f64, Witness)| a.0 > b.0 || (a.0 == b.0 && witness_key(&a.1) < witness_key(&b.1));
    let best = match family {
        IntervalFamily::DyadicThreeGrids => {
            let mut best: Option<(f64, Witness)> = None;
            for grid in GridId::ALL {
                let table = GridTable::build(
                    &res,
                    grid,
                    |q| {
                        let c = q.cells();
                        let sy = if ie2 == 0.0 { y[c.clone()].iter().cloned().fold(0.0, f64::max) } else { y[c.clone()].iter().sum() };
                        (x[c].iter().sum::<f64>(), sy)
                    },
                    |a, b| (a.0 + b.0, if ie2 == 0.0 { a.1.max(b.1) } else { a.1 + b.1 }),
                );
                for (q, (sx, sy)) in table.iter(&res) {
                    let cand = (eval(*sx, *sy, q.len() as f64), Witness::Dyadic(q));
                    if best.as_ref().is_none_or(|b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
            }
            best.expect("nonempty family")
        }
        IntervalFamily::AllLatticeIntervals => {
            let n = x.len();
            (0..n)
                .into_par_iter()
                .map(|a| {
                    let (mut sx, mut sy) = (0.0, 0.0);
                    let mut best: Option<(f64, Witness)> = None;
                    for b in a + 1..=n {
                        sx += x[b - 1];
                        sy = if ie2 == 0.0 { f64::max(sy, y[b - 1]) } else { sy + y[b - 1] };
                        let cand = (eval(sx, sy, (b - a) as f64), Witness::Cells { start: a, end: b });
                        if best.as_ref().is_none_or(|x| better(&cand, x)) {
                            best = Some(cand);
                        }
                    }
                    best.expect("nonempty")
                })
                .reduce_with(|a, b| if better(&b, &a) { b } else { a })
                .expect("nonempty domain")
        }
    };
    Ok(Characteristic { value: Real::approx(best.0), witness: best.1 })
}

fn fw_dyadic_raw<T: Field>(v: &[T], res: &Resolution) -> (Real, LatticeInterval) {
    let l = res.level();
    let p = prefix_sums(v);
    let mut best: Option<(Real, LatticeInterval)> = None;
    for grid in GridId::ALL {
        // sums[j][k]: w-mass in raw units; acc[j][k]: Σ over leaves of the best key
        let sums = GridTable::build(res, grid, |q| p[q.end()].clone() - p[q.start()].clone(), |a, b| a.clone() + b.clone());
        let mut acc: Vec<Vec<T>> = sums.levels.iter().map(|row| vec![T::zero(); row.len()]).collect();
        for leaf in res.intervals_at(grid, l) {
            let mut q = leaf;
            let mut key_max: Option<T> = None;
            loop {
                let j = q.scale();
                let key = sums.get(j, q.translation()).clone() * T::from_usize(1usize << j);
                if key_max.as_ref().is_none_or(|m| key > *m) {
                    key_max = Some(key);
                }
                let slot = &mut acc[j as usize][(q.translation() - sums.k_lo[j as usize]) as usize];
                *slot = slot.clone() + key_max.clone().expect("set above");
                match q.parent(res) {
                    Some(parent) => q = parent,
                    None => break,
                }
            }
        }
        let two_l = Real::Exact(num::BigRational::from_integer(num::BigInt::one() << l));
        for (q, s) in sums.iter(res) {
            let a = &acc[q.scale() as usize][(q.translation() - sums.k_lo[q.scale() as usize]) as usize];
            let val = a.to_real() / (s.to_real() * &two_l);
            if best.as_ref().is_none_or(|(b, bq)| val > *b || (val == *b && q < *bq)) {
                best = Some((val, q));
            }
        }
    }
    best.expect("nonempty family")
}

fn fw_exact_raw<T: Field>(v: &[T], res: &Resolution) -> (Real, LatticeInterval) {
    let p = prefix_sums(v);
    let family = res.dyadic_family();
    let vals: Vec<(Real, LatticeInterval)> = family
        .par_iter()
        .map(|q| {
            let cells = best_intervals(&p, q.start(), q.end());
            // group Σ_cells S_ab / (b−a) by length
            let mut by_len: Vec<Option<T>> = vec![None; q.len() + 1];
            for &(a, b) in &cells {
                let (a, b) = (a as usize, b as usize);
                let s = p[b].clone() - p[a].clone();
                let slot = &mut by_len[b - a];
                *slot = Some(match slot.take() {
                    None => s,
                    Some(x) => x + s,
                });
            }
            let integral: Real =
                by_len.iter().enumerate().filter_map(|(len, s)| s.as_ref().map(|s| s.to_real() / Real::int(len as i64))).sum();
            let mass = (p[q.end()].clone() - p[q.start()].clone()).to_real();
            (integral / mass, *q)
        })
        .collect();
    vals.into_iter().reduce(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }).expect("nonempty family")
}

/// `[w]_FW = sup_Q w(Q)^{-1} ∫_Q M(w 1_Q)` over the three grids.
pub fn fw_constant(w: &Weight, mode: FwMode) -> Characteristic {
    let res = w.resolution();
    let (value, q) = dispatch!(w.density().store(), v, _scale => match mode {
        FwMode::Dyadic => fw_dyadic_raw(v, &res),
        FwMode::Exact => fw_exact_raw(v, &res),
    });
    Characteristic { value, witness: Witness::Dyadic(q) }
}

/// All characteristics at once, as emitted by the `constants` command.
#[derive(Clone, Debug, Serialize)]
pub struct WeightCharacteristics {
    pub a1: Real,
    pub fw_dyadic: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fw_exact: Option<Real>,
    pub witness: CharacteristicWitnesses,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacteristicWitnesses {
    pub a1: Witness,
    pub fw_dyadic: Witness,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fw_exact: Option<Witness>,
}

pub fn characteristics(w: &Weight, family: IntervalFamily, exact_fw: bool) -> WeightCharacteristics {
    let a1 = a1_constant(w, family);
    let fwd = fw_constant(w, FwMode::Dyadic);
    let fwe = exact_fw.then(|| fw_constant(w, FwMode::Exact));
    WeightCharacteristics {
        a1: a1.value,
        fw_dyadic: fwd.value,
        fw_exact: fwe.as_ref().map(|c| c.value.clone()),
        witness: CharacteristicWitnesses { a1: a1.witness, fw_dyadic: fwd.witness, fw_exact: fwe.map(|c| c.witness) },
    }
}

/// The rescaling `w ↦ w_{r,s} = w^{1/(1/r−1/s)}` and `p ↦ p_{r,s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitedRangeMap {
    pub r: Rat64,
    pub s: Exponent,
    /// `1/(1/r − 1/s)`.
    pub exponent: Rat64,
}

impl LimitedRangeMap {
    pub fn new(r: Rat64, s: Exponent) -> Result<Self> {
        if r <= Rat64::zero() || r.recip() <= s.recip() {
            return param(format!("limited range requires 0 < r < s, got r={r}, s={s}"));
        }
        Ok(LimitedRangeMap { r, s, exponent: (r.recip() - s.recip()).recip() })
    }

    /// `p_{r,s} = (1/r − 1/s)/(1/p − 1/s)`.
    pub fn p_rs(&self, p: Rat64) -> Result<Rat64> {
        let d = p.recip() - self.s.recip();
        if d <= Rat64::zero() {
            return param(format!("p_rs requires p < s, got p={p}"));
        }
        Ok((self.r.recip() - self.s.recip()) / d)
    }
}

pub fn limited_range_transform(w: &Weight, r: Rat64, s: Exponent) -> Result<(Weight, LimitedRangeMap)> {
    let map = LimitedRangeMap::new(r, s)?;
    Ok((w.pow(map.exponent)?, map))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind {
    Constant,
    TwoStep,
    /// `x^β` with `β ∈ (−1, 0]`, cell values are exact cell averages.
    Power(f64),
    RandomA1(f64),
    DoublingRandom,
}

impl FromStr for WeightKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Parameter(format!("weight kind {name} needs an argument")))?
                .parse::<f64>()
                .map_err(|e| Error::Parameter(format!("bad weight argument: {e}")))
        };
        match name {
            "constant" => Ok(WeightKind::Constant),
            "two-step" => Ok(WeightKind::TwoStep),
            "power" => Ok(WeightKind::Power(num(arg)?)),
            "random-a1" => Ok(WeightKind::RandomA1(num(arg)?)),
            "doubling-random" => Ok(WeightKind::DoublingRandom),
            _ => Err(Error::Parameter(format!("unknown weight kind {s:?}"))),
        }
    }
}

const A1_ROUNDS: usize = 64;

/// Deterministic weight generator.
pub fn generate_weight(kind: WeightKind, seed: u64, res: Resolution) -> Result<Weight> {
    let n = res.cell_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        WeightKind::Constant => Ok(Weight::constant(res)),
        WeightKind::TwoStep => {
            let cut = rng.gen_range(1..n);
            let (a, b) = (rng.gen_range(1..=8i128), rng.gen_range(1..=8i128));
            let vals = (0..n).map(|i| if i < cut { a } else { b }).collect();
            Weight::new(GridFunction::from_integers(res, vals, 1)?)
        }
        WeightKind::Power(beta) => power_weight(res, beta),
        WeightKind::DoublingRandom => Weight::new(GridFunction::from_integers(res, cascade(&mut rng, res, 3), 1)?),
        WeightKind::RandomA1(target) => random_a1(&mut rng, res, target),
    }
}

/// `x^β` averaged over each cell: `(b^{β+1} − a^{β+1}) / ((β+1)(b − a))`.
pub fn power_weight(res: Resolution, beta: f64) -> Result<Weight> {
    if !(beta > -1.0 && beta <= 0.0) {
        return param(format!("power weight exponent must lie in (-1, 0], got {beta}"));
    }
    if beta == 0.0 {
        return Ok(Weight::constant(res));
    }
    let n = res.cell_count() as f64;
    let e = beta + 1.0;
    let vals = (0..res.cell_count())
        .map(|i| {
            let (a, b) = (i as f64 / n, (i + 1) as f64 / n);
            (b.powf(e) - a.powf(e)) / (e * (b - a))
        })
        .collect();
    Weight::new(GridFunction::from_f64(res, vals)?)
}

/// Multiplicative cascade on grid 0: at each split one child is multiplied
/// by a random factor in `1..=max_factor`.
pub(crate) fn cascade(rng: &mut ChaCha8Rng, res: Resolution, max_factor: i128) -> Vec<i128> {
    let l = res.level();
    let mut row = vec![1i128];
    for _ in 0..l {
        let mut next = Vec::with_capacity(row.len() * 2);
        for &x in &row {
            let m = rng.gen_range(1..=max_factor);
            if rng.gen_bool(0.5) {
                next.extend([x * m, x]);
            } else {
                next.extend([x, x * m]);
            }
        }
        row = next;
    }
    row.iter().flat_map(|&x| [x, x, x]).collect()
}

fn random_a1(rng: &mut ChaCha8Rng, res: Resolution, target: f64) -> Result<Weight> {
    if !(target >= 1.0 && target.is_finite()) {
        return param(format!("random-a1 target must be ≥ 1, got {target}"));
    }
    let base: Vec<f64> = (0..res.cell_count()).map(|_| rng.gen_range(0.0f64..1.0).powi(2) + 1e-3).collect();
    let quantise = |alpha: f64| -> Result<Weight> {
        let raw: Vec<f64> = base.iter().map(|b| b.powf(alpha)).collect();
        let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let vals = raw.iter().map(|x| ((x / min) * 1024.0).round().max(1.0) as i128).collect();
        Weight::new(GridFunction::from_integers(res, vals, 1)?)
    };
    let a1_at = |alpha: f64| -> Result<(Weight, f64)> {
        let w = quantise(alpha)?;
        let v = a1_constant(&w, IntervalFamily::DyadicThreeGrids).value.to_f64();
        Ok((w, v))
    };
    let within = |v: f64| (v - target).abs() <= 0.1 * target;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut rounds = 0;
    loop {
        let (w, v) = a1_at(hi)?;
        if within(v) {
            return Ok(w);
        }
        if v > target {
            break;
        }
        lo = hi;
        hi *= 2.0;
        rounds += 1;
        if rounds >= A1_ROUNDS {
            return Err(Error::Generation { rounds });
        }
    }
    for _ in 0..A1_ROUNDS {
        let mid = 0.5 * (lo + hi);
        let (w, v) = a1_at(mid)?;
        if within(v) {
            return Ok(w);
        }
        rounds += 1;
        if v > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Generation { rounds })
}
