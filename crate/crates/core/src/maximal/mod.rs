//! Maximal operators: dyadic, uncentred over all lattice intervals,
//! bilinear, and the weight-twisted operator `N^D`.

pub(crate) mod engine;

use num::traits::{One, Zero};
use num::{BigInt, BigRational};

use crate::check::CheckReport;
use crate::error::{param, Result};
use crate::field::{prefix_sums, Field};
use crate::gridfn::{dispatch, weak_norm, GridFunction, MeasureSpec, NormConvention, Store};
use crate::lattice::{GridId, LatticeInterval, Resolution};
use crate::real::{Rat64, Real, DEFAULT_TOL};
use crate::weights::{a1_constant, GridTable, IntervalFamily, Weight};

/// Which intervals a maximal operator ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaximalKind {
    Dyadic(GridId),
    /// Every interval with lattice endpoints.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximalMode {
    pub kind: MaximalKind,
    pub r: Rat64,
}

impl MaximalMode {
    pub fn dyadic(grid: GridId) -> Self {
        MaximalMode { kind: MaximalKind::Dyadic(grid), r: Rat64::one() }
    }

    pub fn exact() -> Self {
        MaximalMode { kind: MaximalKind::Exact, r: Rat64::one() }
    }

    pub fn with_r(self, r: Rat64) -> Self {
        MaximalMode { r, ..self }
    }
}

/// `M_r^P f`.
pub fn maximal(f: &GridFunction, mode: MaximalMode) -> Result<GridFunction> {
    if mode.r <= Rat64::zero() {
        return param("maximal exponent r must be positive");
    }
    if mode.r != Rat64::one() {
        let m = maximal(&f.pow(mode.r)?, MaximalMode { r: Rat64::one(), ..mode })?;
        return m.pow(mode.r.recip());
    }
    match mode.kind {
        MaximalKind::Dyadic(grid) => Ok(dyadic_maximal(f, grid)),
        MaximalKind::Exact => Ok(exact_maximal(f)),
    }
}

/// Best dyadic ancestor per scale-`L` interval of `grid`, top down.
/// Returns, per leaf, the `(j, k)` of the ancestor with the largest average.
fn dyadic_best<T: Field>(p: &[T], res: &Resolution, grid: GridId) -> (GridTable<T>, Vec<(u32, i64)>) {
    let sums = GridTable::build(res, grid, |q| p[q.end()].clone() - p[q.start()].clone(), |a, b| a.clone() + b.clone());
    let l = res.level();
    let key = |j: u32, k: i64| sums.get(j, k).clone() * T::from_usize(1usize << j);
    let mut prev: Vec<(u32, i64)> = Vec::new();
    let mut prev_lo = 0i64;
    for j in 0..=l {
        let range = res.k_range(grid, j);
        let lo = range.start;
        let row: Vec<(u32, i64)> = range
            .map(|k| {
                let own = (j, k);
                if j == 0 || prev.is_empty() {
                    return own;
                }
                let pk = k.div_euclid(2);
                let idx = pk - prev_lo;
                if idx < 0 || idx as usize >= prev.len() {
                    return own;
                }
                let up = prev[idx as usize];
                if key(up.0, up.1) >= key(j, k) {
                    up
                } else {
                    own
                }
            })
            .collect();
        prev = row;
        prev_lo = lo;
    }
    (sums, prev)
}

fn dyadic_maximal(f: &GridFunction, grid: GridId) -> GridFunction {
    let res = f.resolution();
    let n = res.cell_count();
    let l = res.level();
    let first = res.k_range(grid, l).start;
    match f.store() {
        Store::Int { num, den } => {
            let p = prefix_sums(num);
            let (sums, best) = dyadic_best(&p, &res, grid);
            let mut out = vec![0i128; n];
            let mut ok = true;
            for (i, &(j, k)) in best.iter().enumerate() {
                let q = res.interval(grid, l, first + i as i64).expect("leaf");
                match sums.get(j, k).checked_mul(1i128 << j) {
                    Some(v) => out[q.cells()].fill(v),
                    None => ok = false,
                }
            }
            let scale = (3i128 << l).checked_mul(*den);
            if let (true, Some(d)) = (ok, scale) {
                if let Ok(g) = GridFunction::from_integers(res, out, d) {
                    return g;
                }
            }
            let dd = BigInt::from(*den) * BigInt::from(3u64 << l);
            let vals = leaf_fill(
                &res,
                grid,
                &best,
                |j, k| BigRational::new(BigInt::from(*sums.get(j, k)) << j, dd.clone()),
                <BigRational as Zero>::zero(),
            );
            GridFunction::from_store(res, Store::Big(vals))
        }
        Store::Big(v) => {
            let p = prefix_sums(v);
            let (sums, best) = dyadic_best(&p, &res, grid);
            let vals = leaf_fill(
                &res,
                grid,
                &best,
                |j, k| sums.get(j, k) / BigRational::from_integer(BigInt::from(res.scale_len(j))),
                <BigRational as Zero>::zero(),
            );
            GridFunction::from_store(res, Store::Big(vals))
        }
        Store::Float(v) => {
            let p = prefix_sums(v);
            let (sums, best) = dyadic_best(&p, &res, grid);
            let vals = leaf_fill(&res, grid, &best, |j, k| sums.get(j, k) / res.scale_len(j) as f64, 0.0);
            GridFunction::from_store(res, Store::Float(vals))
        }
    }
}

fn leaf_fill<T: Clone>(res: &Resolution, grid: GridId, best: &[(u32, i64)], value: impl Fn(u32, i64) -> T, zero: T) -> Vec<T> {
    let l = res.level();
    let first = res.k_range(grid, l).start;
    let mut out = vec![zero; res.cell_count()];
    for (i, &(j, k)) in best.iter().enumerate() {
        let q = res.interval(grid, l, first + i as i64).expect("leaf");
        out[q.cells()].fill(value(j, k));
    }
    out
}

/// Per-cell maximising interval `[a, b)` of the uncentred maximal operator.
pub fn exact_maximal_witnesses(f: &GridFunction) -> Vec<(usize, usize)> {
    let n = f.len();
    let raw = dispatch!(f.store(), v, _s => engine::best_intervals(&prefix_sums(v), 0, n));
    raw.into_iter().map(|(a, b)| (a as usize, b as usize)).collect()
}

fn exact_maximal(f: &GridFunction) -> GridFunction {
    let res = f.resolution();
    let n = res.cell_count();
    match f.store() {
        Store::Int { num, den } => {
            let p = prefix_sums(num);
            let best = engine::best_intervals(&p, 0, n);
            let d = BigInt::from(*den);
            let vals = best
                .iter()
                .map(|&(a, b)| {
                    let (a, b) = (a as usize, b as usize);
                    BigRational::new(BigInt::from(p[b] - p[a]), &d * BigInt::from(b - a))
                })
                .collect();
            GridFunction::from_store(res, Store::Big(vals))
        }
        Store::Big(v) => {
            let p = prefix_sums(v);
            let best = engine::best_intervals(&p, 0, n);
            let vals =
                best.iter().map(|&(a, b)| (&p[b as usize] - &p[a as usize]) / BigRational::from_integer(BigInt::from(b - a))).collect();
            GridFunction::from_store(res, Store::Big(vals))
        }
        Store::Float(v) => {
            let p = prefix_sums(v);
            let best = engine::best_intervals(&p, 0, n);
            let vals = best.iter().map(|&(a, b)| (p[b as usize] - p[a as usize]) / (b - a) as f64).collect();
            GridFunction::from_store(res, Store::Float(vals))
        }
    }
}

/// `⟨f⟩_{1,Q} ⟨w⟩_{1,Q}^{-θ}` from the two averages.
pub(crate) fn twisted(f_mean: &Real, w_mean: &Real, theta: Rat64) -> Real {
    if theta.is_zero() {
        f_mean.clone()
    } else {
        f_mean * w_mean.pow(-theta)
    }
}

/// `N^D f = sup_{Q ∈ D, Q ∋ x} ⟨f⟩_{1,Q} ⟨w⟩_{1,Q}^{-θ}`; cells not covered by
/// any interval of the grid get 0.
pub fn weighted_n(f: &GridFunction, w: &Weight, theta: Rat64, grid: GridId) -> Result<GridFunction> {
    if theta < Rat64::zero() || theta >= Rat64::one() {
        return param(format!("weighted maximal requires 0 ≤ θ < 1, got {theta}"));
    }
    if theta.is_zero() {
        return Ok(dyadic_maximal(f, grid));
    }
    let res = f.resolution();
    let (pf, pw) = (f.prefix(), w.density().prefix());
    let vals = per_leaf_sup(&res, grid, |q| twisted(&pf.average(q.cells()), &pw.average(q.cells()), theta));
    GridFunction::from_reals(res, vals)
}

/// Cell values `sup_{Q ∋ x} value(Q)` over one grid (0 off the grid's leaves).
pub(crate) fn per_leaf_sup(res: &Resolution, grid: GridId, value: impl Fn(&LatticeInterval) -> Real) -> Vec<Real> {
    let l = res.level();
    let mut prev: Vec<Real> = Vec::new();
    let mut prev_lo = 0i64;
    for j in 0..=l {
        let range = res.k_range(grid, j);
        let lo = range.start;
        let row: Vec<Real> = range
            .map(|k| {
                let q = res.interval(grid, j, k).expect("in range");
                let own = value(&q);
                let idx = k.div_euclid(2) - prev_lo;
                if j > 0 && idx >= 0 && (idx as usize) < prev.len() {
                    own.max(prev[idx as usize].clone())
                } else {
                    own
                }
            })
            .collect();
        prev = row;
        prev_lo = lo;
    }
    let mut out = vec![Real::zero(); res.cell_count()];
    for (i, v) in prev.into_iter().enumerate() {
        let q = res.interval(grid, l, prev_lo + i as i64).expect("leaf");
        for c in q.cells() {
            out[c] = v.clone();
        }
    }
    out
}

/// `‖N^D f‖_{L^{1,∞}(w)} ≤ [w]_1^{1−θ} ‖f‖_{L^1(w^{1−θ})}`.
pub fn n_weak_check(f: &GridFunction, w: &Weight, theta: Rat64, grid: GridId) -> Result<CheckReport> {
    let nf = weighted_n(f, w, theta, grid)?;
    let lhs = weak_norm(&nf, Rat64::one(), MeasureSpec::Weighted(w), NormConvention::Measure, None)?;
    let a1 = a1_constant(w, IntervalFamily::DyadicThreeGrids).value;
    let e = Rat64::one() - theta;
    let wd = w.density();
    let integral: Real = (0..f.len()).map(|i| f.value(i) * wd.value(i).pow(e)).sum::<Real>() * f.resolution().cell_measure();
    Ok(CheckReport::le(lhs, a1.pow(e) * integral, DEFAULT_TOL))
}

/// `M^P_{(r,s)}(f, g) = sup_{Q ∈ P, Q ∋ x} ⟨f⟩_{r,Q} ⟨g⟩_{s,Q}`.
pub fn bilinear_maximal(f: &GridFunction, g: &GridFunction, r: Rat64, s: Rat64, kind: MaximalKind) -> Result<GridFunction> {
    if r <= Rat64::zero() || s <= Rat64::zero() {
        return param("bilinear maximal exponents must be positive");
    }
    let res = f.resolution();
    let (fr, gs) = (f.pow(r)?, g.pow(s)?);
    let (pf, pg) = (fr.prefix(), gs.prefix());
    let value = |a: usize, b: usize| pf.average(a..b).pow(r.recip()) * pg.average(a..b).pow(s.recip());
    let vals = match kind {
        MaximalKind::Dyadic(grid) => per_leaf_sup(&res, grid, |q| value(q.start(), q.end())),
        MaximalKind::Exact => {
            let n = res.cell_count();
            let mut out = vec![Real::zero(); n];
            for a in 0..n {
                // suffix maximum over b of value(a, b) gives the best interval starting at a
                let mut suffix = Real::zero();
                let vals: Vec<Real> = (a + 1..=n).map(|b| value(a, b)).collect();
                for i in (a..n).rev() {
                    suffix = suffix.max(vals[i - a].clone());
                    if suffix > out[i] {
                        out[i] = suffix.clone();
                    }
                }
            }
            out
        }
    };
    GridFunction::from_reals(res, vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(l: u32) -> Resolution {
        Resolution::new(l).unwrap()
    }

    #[test]
    fn constant_is_fixed() {
        let r = res(4);
        let c = GridFunction::constant(r, &Real::frac(3, 7)).unwrap();
        for mode in [MaximalMode::dyadic(GridId::Zero), MaximalMode::exact(), MaximalMode::exact().with_r(Rat64::from_integer(2))] {
            let m = maximal(&c, mode).unwrap();
            for i in 0..r.cell_count() {
                assert!(m.value(i).eq_tol(&Real::frac(3, 7), 1e-12));
            }
        }
    }

    #[test]
    fn half_indicator_dyadic() {
        let r = res(3);
        let n = r.cell_count();
        let f = GridFunction::indicator(r, 0..n / 2, &Real::one()).unwrap();
        let m = maximal(&f, MaximalMode::dyadic(GridId::Zero)).unwrap();
        assert_eq!(m.value(0), Real::one());
        assert_eq!(m.value(n - 1), Real::frac(1, 2));
    }

    #[test]
    fn weighted_n_examples() {
        let r = res(3);
        let one = GridFunction::constant(r, &Real::one()).unwrap();
        let w4 = Weight::new(GridFunction::constant(r, &Real::int(4)).unwrap()).unwrap();
        let nf = weighted_n(&one, &w4, Rat64::new(1, 2), GridId::Zero).unwrap();
        for i in 0..r.cell_count() {
            assert!(nf.value(i).eq_tol(&Real::frac(1, 2), 1e-12));
        }
        assert!(weighted_n(&one, &w4, Rat64::one(), GridId::Zero).is_err());
        let w1 = Weight::constant(r);
        let rep = n_weak_check(&one, &w1, Rat64::zero(), GridId::Zero).unwrap();
        assert_eq!(rep.lhs, Real::one());
        assert_eq!(rep.rhs, Real::one());
        assert!(rep.pass);
    }

    #[test]
    fn bilinear_with_unit_second_factor() {
        let r = res(3);
        let n = r.cell_count();
        let f = GridFunction::from_integers(r, (0..n as i128).map(|i| i % 5).collect(), 1).unwrap();
        let one = GridFunction::constant(r, &Real::one()).unwrap();
        for kind in [MaximalKind::Dyadic(GridId::Third), MaximalKind::Exact] {
            let b = bilinear_maximal(&f, &one, Rat64::one(), Rat64::one(), kind).unwrap();
            let m = maximal(&f, MaximalMode { kind, r: Rat64::one() }).unwrap();
            assert_eq!(b.values(), m.values());
        }
    }
}
