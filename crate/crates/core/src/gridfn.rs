//! Nonnegative step functions on the lattice, measures, strong and weak
//! norms, and the two Kolmogorov lemmas.

use std::cmp::Ordering;
use std::ops::Range;
use std::sync::OnceLock;

use num::traits::{One, Signed, ToPrimitive, Zero};
use num::{BigInt, BigRational, Integer};
use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::error::{param, Error, Result};
use crate::field::prefix_sums;
use crate::lattice::{LatticeInterval, Resolution};
use crate::real::{f64_to_big, format_big, parse_big, Exponent, Rat64, Real, DEFAULT_TOL};
use crate::weights::Weight;

const INT_DEN_LIMIT: i128 = 1 << 100;

/// Scaled-integer storage is used while `max_num · N ≤ 2^62`, which keeps every
/// `(sum × count) × (sum × count)` product of the engines inside `i128`.
pub(crate) fn fits_int(max_num: i128, n: usize) -> bool {
    max_num.checked_mul(n as i128).is_some_and(|x| x <= 1i128 << 62)
}

#[derive(Clone, Debug)]
pub(crate) enum Store {
    /// Values `num[i] / den` with a shared denominator.
    Int {
        num: Vec<i128>,
        den: i128,
    },
    Big(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Runs `$body` with `$v` bound to the raw cell slice (`&[i128]`, `&[BigRational]`
/// or `&[f64]`) and `$scale` to the factor turning raw values into true values.
macro_rules! dispatch {
    ($store:expr, $v:ident, $scale:ident => $body:expr) => {
        match $store {
            $crate::gridfn::Store::Int { num, den } => {
                let $v: &[i128] = &num[..];
                let $scale = $crate::real::Real::frac(1, *den);
                $body
            }
            $crate::gridfn::Store::Big(vals) => {
                let $v: &[num::BigRational] = &vals[..];
                let $scale = $crate::real::Real::one();
                $body
            }
            $crate::gridfn::Store::Float(vals) => {
                let $v: &[f64] = &vals[..];
                let $scale = $crate::real::Real::one();
                $body
            }
        }
    };
}
pub(crate) use dispatch;

/// A nonnegative function, constant on each of the `3·2^L` lattice cells.
#[derive(Clone, Debug)]
pub struct GridFunction {
    res: Resolution,
    store: Store,
    prefix: OnceLock<Prefix>,
}

impl GridFunction {
    pub(crate) fn from_store(res: Resolution, store: Store) -> Self {
        GridFunction { res, store, prefix: OnceLock::new() }
    }

    pub(crate) fn store(&self) -> &Store {
        &self.store
    }

    /// Values `num[i]/den`.
    pub fn from_integers(res: Resolution, num: Vec<i128>, den: i128) -> Result<Self> {
        check_len(&res, num.len())?;
        if den <= 0 {
            return param("denominator must be positive");
        }
        if num.iter().any(|&x| x < 0) {
            return param("grid functions are nonnegative");
        }
        let max = num.iter().copied().max().unwrap_or(0);
        if fits_int(max, num.len()) {
            let g = num.iter().fold(den, |g, &x| g.gcd(&x));
            let (num, den) = if g > 1 { (num.iter().map(|x| x / g).collect(), den / g) } else { (num, den) };
            Ok(Self::from_store(res, Store::Int { num, den }))
        } else {
            let d = BigInt::from(den);
            let vals = num.into_iter().map(|x| BigRational::new(x.into(), d.clone())).collect();
            Ok(Self::from_store(res, Store::Big(vals)))
        }
    }

    pub fn from_rationals(res: Resolution, vals: Vec<BigRational>) -> Result<Self> {
        check_len(&res, vals.len())?;
        if vals.iter().any(|v| v.is_negative()) {
            return param("grid functions are nonnegative");
        }
        let lcm = vals.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        if let Some(den) = lcm.to_i128().filter(|&d| d <= INT_DEN_LIMIT) {
            let nums: Option<Vec<i128>> = vals.iter().map(|v| (v.numer() * (&lcm / v.denom())).to_i128()).collect();
            if let Some(num) = nums {
                if fits_int(num.iter().copied().max().unwrap_or(0), num.len()) {
                    return Ok(Self::from_store(res, Store::Int { num, den }));
                }
            }
        }
        Ok(Self::from_store(res, Store::Big(vals)))
    }

    pub fn from_f64(res: Resolution, vals: Vec<f64>) -> Result<Self> {
        check_len(&res, vals.len())?;
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return param("grid function values must be finite and nonnegative");
        }
        Ok(Self::from_store(res, Store::Float(vals)))
    }

    /// Exact storage when every value is exact, floating point otherwise.
    pub fn from_reals(res: Resolution, vals: Vec<Real>) -> Result<Self> {
        if vals.iter().all(Real::is_exact) {
            let rats = vals
                .into_iter()
                .map(|v| match v {
                    Real::Exact(r) => r,
                    Real::Approx(_) => unreachable!(),
                })
                .collect();
            Self::from_rationals(res, rats)
        } else {
            Self::from_f64(res, vals.iter().map(Real::to_f64).collect())
        }
    }

    pub fn constant(res: Resolution, c: &Real) -> Result<Self> {
        Self::from_reals(res, vec![c.clone(); res.cell_count()])
    }

    pub fn zero(res: Resolution) -> Self {
        Self::from_store(res, Store::Int { num: vec![0; res.cell_count()], den: 1 })
    }

    /// `c` on the cell range, 0 elsewhere.
    pub fn indicator(res: Resolution, cells: Range<usize>, c: &Real) -> Result<Self> {
        let vals = (0..res.cell_count()).map(|i| if cells.contains(&i) { c.clone() } else { Real::zero() }).collect();
        Self::from_reals(res, vals)
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn len(&self) -> usize {
        self.res.cell_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.store, Store::Float(_))
    }

    pub fn value(&self, i: usize) -> Real {
        match &self.store {
            Store::Int { num, den } => Real::frac(num[i], *den),
            Store::Big(v) => Real::Exact(v[i].clone()),
            Store::Float(v) => Real::Approx(v[i]),
        }
    }

    pub fn value_f64(&self, i: usize) -> f64 {
        match &self.store {
            Store::Int { num, den } => num[i] as f64 / *den as f64,
            Store::Big(v) => crate::real::big_to_f64(&v[i]),
            Store::Float(v) => v[i],
        }
    }

    pub fn values(&self) -> Vec<Real> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value_f64(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match &self.store {
            Store::Int { num, .. } => num.iter().all(|x| *x == 0),
            Store::Big(v) => v.iter().all(Zero::is_zero),
            Store::Float(v) => v.iter().all(|x| *x == 0.0),
        }
    }

    pub fn is_strictly_positive(&self) -> bool {
        match &self.store {
            Store::Int { num, .. } => num.iter().all(|x| *x > 0),
            Store::Big(v) => v.iter().all(Signed::is_positive),
            Store::Float(v) => v.iter().all(|x| *x > 0.0),
        }
    }

    /// Cached prefix sums of the cell values.
    pub fn prefix(&self) -> &Prefix {
        self.prefix.get_or_init(|| {
            let kind = match &self.store {
                Store::Int { num, den } => PrefixKind::Int { p: prefix_sums(num), den: *den },
                Store::Big(v) => PrefixKind::Big(prefix_sums(v)),
                Store::Float(v) => PrefixKind::Float(prefix_sums(v)),
            };
            Prefix { n: self.len(), kind }
        })
    }

    /// `∫` over a cell range (Lebesgue).
    pub fn integral(&self, cells: Range<usize>) -> Real {
        self.prefix().integral(cells)
    }

    /// `⟨f⟩_{1,Q}` over a cell range.
    pub fn mean(&self, cells: Range<usize>) -> Real {
        self.prefix().average(cells)
    }

    pub fn max_on(&self, cells: Range<usize>) -> Real {
        cells.map(|i| self.value(i)).fold(Real::zero(), Real::max)
    }

    pub fn min_on(&self, cells: Range<usize>) -> Real {
        let mut it = cells.map(|i| self.value(i));
        let first = it.next().unwrap_or_else(Real::zero);
        it.fold(first, Real::min)
    }

    /// Pointwise `f^e`; exact for integer exponents, and for fractional ones
    /// when every value is a perfect power.
    pub fn pow(&self, e: Rat64) -> Result<Self> {
        if e == Rat64::one() {
            return Ok(self.clone());
        }
        if !e.is_integer() {
            if self.is_exact() && (e > Rat64::zero() || self.is_strictly_positive()) {
                let mut out = Vec::with_capacity(self.len());
                for v in self.values() {
                    let p = v.pow(e);
                    if !p.is_exact() {
                        return Ok(self.powf(crate::real::rat_to_f64(e)));
                    }
                    out.push(p);
                }
                return Self::from_reals(self.res, out);
            }
            return Ok(self.powf(crate::real::rat_to_f64(e)));
        }
        let n = *e.numer();
        if n < 0 && !self.is_strictly_positive() {
            return param("negative power of a function with zeros");
        }
        if let (Store::Int { num, den }, true) = (&self.store, n >= 0) {
            let n = n as u32;
            let nums: Option<Vec<i128>> = num.iter().map(|x| x.checked_pow(n)).collect();
            if let (Some(num), Some(den)) = (nums, den.checked_pow(n)) {
                return Self::from_integers(self.res, num, den);
            }
        }
        Self::from_reals(self.res, self.values().iter().map(|v| v.pow(e)).collect())
    }

    pub fn powf(&self, e: f64) -> Self {
        let vals = self.to_f64_vec().into_iter().map(|x| x.powf(e)).collect();
        Self::from_store(self.res, Store::Float(vals))
    }

    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.same_res(other)?;
        if let (Store::Int { num: a, den: da }, Store::Int { num: b, den: db }) = (&self.store, &other.store) {
            let nums: Option<Vec<i128>> = a.iter().zip(b).map(|(x, y)| x.checked_mul(*y)).collect();
            if let (Some(num), Some(den)) = (nums, da.checked_mul(*db)) {
                return Self::from_integers(self.res, num, den);
            }
        }
        Self::from_reals(self.res, (0..self.len()).map(|i| self.value(i) * other.value(i)).collect())
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.same_res(other)?;
        Self::from_reals(self.res, (0..self.len()).map(|i| self.value(i) + other.value(i)).collect())
    }

    /// `c·f` for `c ≥ 0`.
    pub fn scale(&self, c: &Real) -> Result<Self> {
        if let (Store::Int { num, den }, Real::Exact(r)) = (&self.store, c) {
            if let (Some(a), Some(b)) = (r.numer().to_i128(), r.denom().to_i128()) {
                let nums: Option<Vec<i128>> = num.iter().map(|x| x.checked_mul(a)).collect();
                if let (Some(num), Some(den)) = (nums, den.checked_mul(b)) {
                    return Self::from_integers(self.res, num, den);
                }
            }
        }
        Self::from_reals(self.res, self.values().iter().map(|v| v * c).collect())
    }

    /// Zero outside the cell set.
    pub fn restrict(&self, set: &CellSet) -> Result<Self> {
        let mask = set.mask(self.len());
        Self::from_reals(self.res, (0..self.len()).map(|i| if mask[i] { self.value(i) } else { Real::zero() }).collect())
    }

    fn same_res(&self, other: &GridFunction) -> Result<()> {
        if self.res != other.res {
            return Err(Error::ResolutionMismatch { expected: self.res.level(), found: other.res.level() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> GridFunctionJson {
        let values = (0..self.len())
            .map(|i| match self.value(i) {
                Real::Exact(r) => format_big(&r),
                Real::Approx(x) => format_big(&f64_to_big(x).expect("finite value")),
            })
            .collect();
        GridFunctionJson { level: self.res.level(), values }
    }

    pub fn from_json(json: &GridFunctionJson) -> Result<Self> {
        let res = Resolution::new(json.level)?;
        let vals = json.values.iter().map(|s| parse_big(s)).collect::<Result<Vec<_>>>()?;
        if vals.len() != res.cell_count() {
            return Err(Error::Malformed(format!("expected {} values for L={}, found {}", res.cell_count(), json.level, vals.len())));
        }
        if vals.iter().any(|v| v.is_negative()) {
            return Err(Error::Malformed("negative value in grid function".into()));
        }
        Self::from_rationals(res, vals)
    }
}

fn check_len(res: &Resolution, len: usize) -> Result<()> {
    if len != res.cell_count() {
        return param(format!("expected {} cell values, got {len}", res.cell_count()));
    }
    Ok(())
}

/// `{"L": int, "values": ["num/den", ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionJson {
    #[serde(rename = "L")]
    pub level: u32,
    pub values: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Prefix {
    n: usize,
    kind: PrefixKind,
}

#[derive(Clone, Debug)]
enum PrefixKind {
    Int { p: Vec<i128>, den: i128 },
    Big(Vec<BigRational>),
    Float(Vec<f64>),
}

impl Prefix {
    /// Sum of the cell values over the range.
    pub fn sum(&self, r: Range<usize>) -> Real {
        match &self.kind {
            PrefixKind::Int { p, den } => Real::frac(p[r.end] - p[r.start], *den),
            PrefixKind::Big(p) => Real::Exact(&p[r.end] - &p[r.start]),
            PrefixKind::Float(p) => Real::Approx(p[r.end] - p[r.start]),
        }
    }

    pub fn integral(&self, r: Range<usize>) -> Real {
        match &self.kind {
            PrefixKind::Int { p, den } => {
                Real::Exact(BigRational::new(BigInt::from(p[r.end] - p[r.start]), BigInt::from(*den) * BigInt::from(self.n)))
            }
            _ => self.sum(r) / Real::int(self.n as i64),
        }
    }

    pub fn average(&self, r: Range<usize>) -> Real {
        let len = r.len();
        match &self.kind {
            PrefixKind::Int { p, den } => {
                Real::Exact(BigRational::new(BigInt::from(p[r.end] - p[r.start]), BigInt::from(*den) * BigInt::from(len)))
            }
            _ => self.sum(r) / Real::int(len as i64),
        }
    }

    pub fn total(&self) -> Real {
        self.integral(0..self.n)
    }
}

/// Sorted set of cell indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellSet(Vec<usize>);

impl CellSet {
    pub fn new(res: &Resolution, mut cells: Vec<usize>) -> Result<Self> {
        cells.sort_unstable();
        cells.dedup();
        if cells.last().is_some_and(|&c| c >= res.cell_count()) {
            return param("cell index outside the domain");
        }
        Ok(CellSet(cells))
    }

    pub(crate) fn from_sorted(cells: Vec<usize>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        CellSet(cells)
    }

    pub fn from_range(cells: Range<usize>) -> Self {
        CellSet(cells.collect())
    }

    pub fn full(res: &Resolution) -> Self {
        Self::from_range(0..res.cell_count())
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        CellSet(mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn cells(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.0.binary_search(&cell).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &c in &self.0 {
            m[c] = true;
        }
        m
    }

    /// Members inside a cell range.
    pub fn within(&self, r: Range<usize>) -> &[usize] {
        let lo = self.0.partition_point(|&c| c < r.start);
        let hi = self.0.partition_point(|&c| c < r.end);
        &self.0[lo..hi]
    }

    pub fn intersects(&self, r: Range<usize>) -> bool {
        !self.within(r).is_empty()
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.0.iter().all(|c| other.contains(*c))
    }

    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> CellSet {
        CellSet(self.0.iter().copied().filter(|&c| keep(c)).collect())
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        self.filter(|c| !other.contains(c))
    }
}

/// The measure against which integrals and level sets are taken.
#[derive(Clone, Copy, Debug)]
pub enum MeasureSpec<'a> {
    Lebesgue,
    Weighted(&'a Weight),
}

impl MeasureSpec<'_> {
    /// Density of the measure on a cell (relative to Lebesgue).
    pub fn density(&self, cell: usize) -> Real {
        match self {
            MeasureSpec::Lebesgue => Real::one(),
            MeasureSpec::Weighted(w) => w.density().value(cell),
        }
    }

    pub fn measure_range(&self, res: &Resolution, cells: Range<usize>) -> Real {
        match self {
            MeasureSpec::Lebesgue => res.measure_of(cells.len()),
            MeasureSpec::Weighted(w) => w.measure(cells),
        }
    }

    pub fn measure_set(&self, res: &Resolution, set: &CellSet) -> Real {
        match self {
            MeasureSpec::Lebesgue => res.measure_of(set.len()),
            MeasureSpec::Weighted(w) => set.iter().map(|c| w.density().value(c)).sum::<Real>() * res.cell_measure(),
        }
    }
}

/// How a weight enters an `L^p` norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormConvention {
    /// `‖f‖ = ‖f·w‖_{L^p(dx)}`.
    Multiplier,
    /// `‖f‖ = ‖f‖_{L^p(w dx)}`.
    Measure,
}

/// `⟨f⟩_{p,Q}`; exact for `p = 1` and `p = ∞`.
pub fn average(f: &GridFunction, p: Exponent, q: &LatticeInterval) -> Result<Real> {
    average_cells(f, p, q.cells())
}

pub fn average_cells(f: &GridFunction, p: Exponent, cells: Range<usize>) -> Result<Real> {
    if cells.is_empty() || cells.end > f.len() {
        return param("average over an empty or out-of-domain range");
    }
    match p {
        Exponent::Infinite => Ok(f.max_on(cells)),
        Exponent::Finite(e) if e == Rat64::one() => Ok(f.mean(cells)),
        Exponent::Finite(e) if e > Rat64::zero() => {
            let len = cells.len() as i64;
            let s: Real = cells.map(|i| f.value(i).pow(e)).sum();
            Ok((s / Real::int(len)).pow(e.recip()))
        }
        _ => param("average exponent must be positive"),
    }
}

/// `‖f‖_{L^p_w}` under the chosen convention.
pub fn weighted_norm(f: &GridFunction, p: Rat64, w: &Weight, conv: NormConvention) -> Result<Real> {
    if p <= Rat64::zero() {
        return param("norm exponent must be positive");
    }
    let wd = w.density();
    let n = f.len();
    let s: Real = (0..n)
        .map(|i| {
            let (fi, wi) = (f.value(i), wd.value(i));
            match conv {
                NormConvention::Multiplier => (fi * wi).pow(p),
                NormConvention::Measure => fi.pow(p) * wi,
            }
        })
        .sum();
    Ok((s * f.resolution().cell_measure()).pow(p.recip()))
}

/// `sup_{λ>0} λ·μ({f·u > λ})^{1/p}`, evaluated at the value breakpoints.
///
/// Under the multiplier convention with a weighted `mu` the level sets are
/// measured by `w^p dx`, which is `‖λ 1_{f·u>λ}‖_{L^p_w}`.
pub fn weak_norm(f: &GridFunction, p: Rat64, mu: MeasureSpec<'_>, conv: NormConvention, u: Option<&Weight>) -> Result<Real> {
    if p <= Rat64::zero() {
        return param("weak-norm exponent must be positive");
    }
    let n = f.len();
    let mut cells: Vec<(Real, Real)> = (0..n)
        .map(|i| {
            let g = match u {
                Some(u) => f.value(i) * u.density().value(i),
                None => f.value(i),
            };
            let d = match (conv, &mu) {
                (NormConvention::Multiplier, MeasureSpec::Weighted(w)) => w.density().value(i).pow(p),
                _ => mu.density(i),
            };
            (g, d)
        })
        .filter(|(g, _)| g.is_positive())
        .collect();
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let cell = f.resolution().cell_measure();
    let root = p.recip();
    let mut best = Real::zero();
    let mut acc = Real::zero();
    let mut i = 0;
    while i < cells.len() {
        let level = cells[i].0.clone();
        while i < cells.len() && cells[i].0 == level {
            acc = acc + &cells[i].1;
            i += 1;
        }
        let cand = &level * (&acc * &cell).pow(root);
        best = best.max(cand);
    }
    Ok(best)
}

/// `∫_E f^θ dμ ≤ (p/θ)'·‖f‖^θ_{L^{p,∞}(μ)}·μ(E)^{1−θ/p}`.
pub fn kolmogorov_check(f: &GridFunction, mu: MeasureSpec<'_>, e: &CellSet, p: Rat64, theta: Rat64) -> Result<CheckReport> {
    if theta <= Rat64::zero() || theta >= p {
        return param(format!("Kolmogorov requires 0 < θ < p, got θ={theta}, p={p}"));
    }
    let res = f.resolution();
    let mu_e = mu.measure_set(&res, e);
    if !mu_e.is_positive() {
        return param("Kolmogorov requires μ(E) > 0");
    }
    let lhs: Real = e.iter().map(|c| f.value(c).pow(theta) * mu.density(c)).sum::<Real>() * res.cell_measure();
    let wn = weak_norm(f, p, mu, NormConvention::Measure, None)?;
    let conj = Real::from_rat64(p / (p - theta));
    let rhs = conj * wn.pow(theta) * mu_e.pow(Rat64::one() - theta / p);
    Ok(CheckReport::le(lhs, rhs, DEFAULT_TOL))
}

/// The subset construction of the two-sided Kolmogorov lemma and its checks.
#[derive(Clone, Debug, Serialize)]
pub struct KolmogorovSubset {
    pub subset: CellSet,
    pub gamma: Real,
    /// `μ(E)/2 ≤ μ(E')`.
    pub measure: CheckReport,
    /// `∫_{E'} f^q dμ ≤ 2^{q/p} μ(E)^{1−q/p} ‖f‖^q_{L^{p,∞}}`.
    pub integral: CheckReport,
    /// `‖f‖_{L^{p,∞}} ≤ 2^{1/q} C^{1/q}` with `C` the empirical constant over level sets.
    pub converse: CheckReport,
}

impl KolmogorovSubset {
    pub fn pass(&self) -> bool {
        self.measure.pass && self.integral.pass && self.converse.pass
    }
}

pub fn kolmogorov_subset(f: &GridFunction, mu: MeasureSpec<'_>, e: &CellSet, p: Rat64, q: Rat64) -> Result<KolmogorovSubset> {
    if p <= Rat64::zero() || q <= Rat64::zero() {
        return param("Kolmogorov subset requires p, q > 0");
    }
    let res = f.resolution();
    let wn = weak_norm(f, p, mu, NormConvention::Measure, None)?;
    let (subset, gamma, measure, integral) = kolmogorov_construct(f, mu, e, p, q, &wn)?;

    // Converse direction: the smallest admissible C over the level sets {f ≥ v}.
    let mut levels: Vec<Real> = (0..f.len()).map(|i| f.value(i)).filter(Real::is_positive).collect();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    levels.dedup_by(|a, b| a == b);
    let mut c_emp = Real::zero();
    for v in &levels {
        let level_set = CellSet::new(&res, (0..f.len()).filter(|&i| f.value(i) >= *v).collect())?;
        let (_, _, _, part) = kolmogorov_construct(f, mu, &level_set, p, q, &wn)?;
        let mu_level = mu.measure_set(&res, &level_set);
        let c = part.lhs / mu_level.pow(Rat64::one() - q / p);
        c_emp = c_emp.max(c);
    }
    let two = Real::int(2);
    let converse = CheckReport::le(wn, two.pow(q.recip()) * c_emp.pow(q.recip()), DEFAULT_TOL);
    Ok(KolmogorovSubset { subset, gamma, measure, integral, converse })
}

fn kolmogorov_construct(
    f: &GridFunction,
    mu: MeasureSpec<'_>,
    e: &CellSet,
    p: Rat64,
    q: Rat64,
    wn: &Real,
) -> Result<(CellSet, Real, CheckReport, CheckReport)> {
    let res = f.resolution();
    let mu_e = mu.measure_set(&res, e);
    if !mu_e.is_positive() {
        return param("Kolmogorov subset requires μ(E) > 0");
    }
    let two = Real::int(2);
    let gamma = (&two / &mu_e).pow(p.recip()) * wn;
    let subset = e.filter(|c| f.value(c) <= gamma);
    let mu_sub = mu.measure_set(&res, &subset);
    let measure = CheckReport::le(&mu_e / &two, mu_sub, DEFAULT_TOL);
    let lhs: Real = subset.iter().map(|c| f.value(c).pow(q) * mu.density(c)).sum::<Real>() * res.cell_measure();
    let rhs = two.pow(q / p) * mu_e.pow(Rat64::one() - q / p) * wn.pow(q);
    Ok((subset, gamma, measure, CheckReport::le(lhs, rhs, DEFAULT_TOL)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(l: u32) -> Resolution {
        Resolution::new(l).unwrap()
    }

    #[test]
    fn averages() {
        let r = res(3);
        let n = r.cell_count();
        let half = GridFunction::indicator(r, 0..n / 2, &Real::one()).unwrap();
        let unit = r.unit();
        assert_eq!(average(&half, Exponent::int(1), &unit).unwrap(), Real::frac(1, 2));
        let two = average(&half, Exponent::int(2), &unit).unwrap().to_f64();
        assert!((two - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(average(&half, Exponent::Infinite, &unit).unwrap(), Real::one());
        let c = GridFunction::constant(r, &Real::frac(7, 3)).unwrap();
        assert_eq!(average(&c, Exponent::int(1), &unit).unwrap(), Real::frac(7, 3));
        assert!((average(&c, Exponent::int(3), &unit).unwrap().to_f64() - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm_conventions() {
        let r = res(2);
        let n = r.cell_count();
        let one = GridFunction::constant(r, &Real::one()).unwrap();
        let w1 = Weight::new(one.clone()).unwrap();
        for conv in [NormConvention::Multiplier, NormConvention::Measure] {
            assert!((weighted_norm(&one, Rat64::from_integer(3), &w1, conv).unwrap().to_f64() - 1.0).abs() < 1e-12);
        }
        let half = GridFunction::indicator(r, 0..n / 2, &Real::one()).unwrap();
        let w2 = Weight::new(GridFunction::constant(r, &Real::int(2)).unwrap()).unwrap();
        let p1 = Rat64::one();
        assert_eq!(weighted_norm(&half, p1, &w2, NormConvention::Multiplier).unwrap(), Real::one());
        assert_eq!(weighted_norm(&half, p1, &w2, NormConvention::Measure).unwrap(), Real::one());
        let p2 = Rat64::from_integer(2);
        let m = weighted_norm(&half, p2, &w2, NormConvention::Multiplier).unwrap().to_f64();
        assert!((m - 2.0f64.sqrt()).abs() < 1e-12);
        let me = weighted_norm(&half, p2, &w2, NormConvention::Measure).unwrap().to_f64();
        assert!((me - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_norm_breakpoints() {
        // values 4, 2, 1 on measures 1/8, 1/4, 5/8
        let r = res(3);
        let n = r.cell_count();
        let vals: Vec<i128> = (0..n)
            .map(|i| {
                if i < n / 8 {
                    4
                } else if i < 3 * n / 8 {
                    2
                } else {
                    1
                }
            })
            .collect();
        let f = GridFunction::from_integers(r, vals, 1).unwrap();
        let wn = weak_norm(&f, Rat64::one(), MeasureSpec::Lebesgue, NormConvention::Measure, None).unwrap();
        assert_eq!(wn, Real::one());
        let one = GridFunction::constant(r, &Real::one()).unwrap();
        let wn2 = weak_norm(&one, Rat64::from_integer(2), MeasureSpec::Lebesgue, NormConvention::Measure, None).unwrap();
        assert!((wn2.to_f64() - 1.0).abs() < 1e-12);
        let z = GridFunction::zero(r);
        assert_eq!(weak_norm(&z, Rat64::one(), MeasureSpec::Lebesgue, NormConvention::Measure, None).unwrap(), Real::zero());
    }

    #[test]
    fn kolmogorov_examples() {
        let r = res(3);
        let n = r.cell_count();
        let full = CellSet::full(&r);
        let half = Rat64::new(1, 2);
        let z = GridFunction::zero(r);
        let rep = kolmogorov_check(&z, MeasureSpec::Lebesgue, &full, Rat64::one(), half).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.lhs, Real::zero());
        let one = GridFunction::constant(r, &Real::one()).unwrap();
        let rep = kolmogorov_check(&one, MeasureSpec::Lebesgue, &full, Rat64::one(), half).unwrap();
        assert_eq!(rep.lhs, Real::one());
        assert!((rep.rhs.to_f64() - 2.0).abs() < 1e-12);
        assert!(kolmogorov_check(&one, MeasureSpec::Lebesgue, &full, Rat64::one(), Rat64::one()).is_err());

        let sub = kolmogorov_subset(&one, MeasureSpec::Lebesgue, &full, Rat64::one(), Rat64::one()).unwrap();
        assert_eq!(sub.gamma, Real::int(2));
        assert_eq!(sub.subset, full);
        assert!(sub.pass());

        let vals: Vec<i128> = (0..n).map(|i| if i < n / 8 { 5 } else { 1 }).collect();
        let f = GridFunction::from_integers(r, vals, 1).unwrap();
        let sub = kolmogorov_subset(&f, MeasureSpec::Lebesgue, &full, Rat64::one(), Rat64::one()).unwrap();
        assert_eq!(sub.gamma, Real::int(2));
        assert_eq!(sub.subset, CellSet::from_range(n / 8..n));
        assert_eq!(sub.measure.rhs, Real::frac(7, 8));
        assert_eq!(sub.integral.lhs, Real::frac(7, 8));
        assert!(sub.pass());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let r = res(1);
        let f = GridFunction::from_integers(r, vec![1, 2, 3, 0, 5, 6], 4).unwrap();
        let j = f.to_json();
        assert_eq!(j.values[0], "1/4");
        let g = GridFunction::from_json(&j).unwrap();
        assert_eq!(g.values(), f.values());
        let bad = GridFunctionJson { level: 1, values: vec!["1".into()] };
        assert!(matches!(GridFunction::from_json(&bad), Err(Error::Malformed(_))));
    }
}
