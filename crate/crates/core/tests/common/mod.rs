//! Brute-force oracles, written for clarity over speed.
#![allow(dead_code)]

use num::{BigInt, BigRational, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sparselab::corpus::{random_collection, random_density_values, random_grid, random_weight_values};
use sparselab::gridfn::GridFunction;
use sparselab::lattice::{GridId, LatticeInterval, Resolution};
use sparselab::real::Real;
use sparselab::sparse::{Eta, SparseCollection};

pub const LEVELS: [u32; 3] = [4, 6, 8];

pub fn rat(num: i128, den: i128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn exact(r: &Real) -> BigRational {
    r.as_exact().cloned().unwrap_or_else(|| panic!("expected an exact value, got {r}"))
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Every dyadic interval of the three grids, as cell ranges.
pub fn dyadic_ranges(res: &Resolution) -> Vec<(usize, usize)> {
    res.dyadic_family().iter().map(|q| (q.start(), q.end())).collect()
}

/// Every `[a, b)` with `0 ≤ a < b ≤ n`.
pub fn all_ranges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect()
}

/// `sup_Q ⟨w⟩_Q / min_Q w` over the given intervals.
pub fn a1(w: &[i128], ranges: &[(usize, usize)]) -> BigRational {
    ranges
        .iter()
        .map(|&(a, b)| {
            let sum: i128 = w[a..b].iter().sum();
            let min = *w[a..b].iter().min().expect("nonempty");
            rat(sum, (b - a) as i128 * min)
        })
        .max()
        .expect("nonempty family")
}

/// `sup_Q ⟨w⟩_{1/(1/p−1/s),Q} ⟨w^{-1}⟩_{1/(1/r−1/p),Q}` with `inv_s = 1/s`.
pub fn aprs(w: &[f64], p: f64, r: f64, inv_s: f64, ranges: &[(usize, usize)]) -> f64 {
    let ie1 = 1.0 / p - inv_s;
    let ie2 = 1.0 / r - 1.0 / p;
    ranges
        .iter()
        .map(|&(a, b)| {
            let len = (b - a) as f64;
            let first = (w[a..b].iter().map(|x| x.powf(1.0 / ie1)).sum::<f64>() / len).powf(ie1);
            let second = if ie2 == 0.0 {
                w[a..b].iter().map(|x| 1.0 / x).fold(0.0, f64::max)
            } else {
                (w[a..b].iter().map(|x| x.powf(-1.0 / ie2)).sum::<f64>() / len).powf(ie2)
            };
            first * second
        })
        .fold(0.0, f64::max)
}

/// Uncentred maximal function restricted to intervals inside `[lo, hi)`,
/// as `(sum, len)` pairs for the cells of `[lo, hi)`.
fn maximal_pairs(f: &[i128], lo: usize, hi: usize) -> Vec<(i128, i128)> {
    let mut best = vec![(0i128, 1i128); hi - lo];
    let better = |x: (i128, i128), y: (i128, i128)| x.0 * y.1 > y.0 * x.1;
    for a in lo..hi {
        let mut sums = vec![0i128; hi - a + 1];
        for b in a + 1..=hi {
            sums[b - a] = sums[b - a - 1] + f[b - 1];
        }
        let mut suffix = (0i128, 1i128);
        for b in (a + 1..=hi).rev() {
            let cand = (sums[b - a], (b - a) as i128);
            if better(cand, suffix) {
                suffix = cand;
            }
            if better(suffix, best[b - 1 - lo]) {
                best[b - 1 - lo] = suffix;
            }
        }
    }
    best
}

/// `Mf(x) = sup_{a ≤ x < b} ⟨f⟩_{[a,b)}` for integer `f`.
pub fn exact_maximal(f: &[i128]) -> Vec<BigRational> {
    maximal_pairs(f, 0, f.len()).into_iter().map(|(s, l)| rat(s, l)).collect()
}

/// `sup_Q w(Q)^{-1} ∫_Q M(w 1_Q)` over the three grids, `M` uncentred.
pub fn fw_exact(res: &Resolution, w: &[i128]) -> BigRational {
    dyadic_ranges(res)
        .into_iter()
        .map(|(a, b)| {
            let integral: BigRational = maximal_pairs(w, a, b).into_iter().map(|(s, l)| rat(s, l)).sum();
            integral / rat(w[a..b].iter().sum(), 1)
        })
        .max()
        .expect("nonempty family")
}

/// `⟨f⟩_{r,Q}` in floating point.
pub fn avg_r(f: &[f64], q: &LatticeInterval, r: f64) -> f64 {
    let c = q.cells();
    let len = c.len() as f64;
    (f[c].iter().map(|x| x.powf(r)).sum::<f64>() / len).powf(1.0 / r)
}

/// `Σ_{Q ∋ x} ⟨f⟩_Q`, cell by cell, for integer `f`.
pub fn sparse_operator_11(f: &[i128], members: &[LatticeInterval]) -> Vec<BigRational> {
    (0..f.len())
        .map(|x| {
            members
                .iter()
                .filter(|q| q.contains_cell(x))
                .map(|q| rat(f[q.cells()].iter().sum(), q.len() as i128))
                .fold(BigRational::zero(), |a, b| a + b)
        })
        .collect()
}

/// `(Σ_{Q ∋ x} ⟨f⟩_{r,Q}^q)^{1/q}`.
pub fn sparse_operator(f: &[f64], members: &[LatticeInterval], r: f64, q: f64) -> Vec<f64> {
    (0..f.len())
        .map(|x| members.iter().filter(|iq| iq.contains_cell(x)).map(|iq| avg_r(f, iq, r).powf(q)).sum::<f64>().powf(1.0 / q))
        .collect()
}

/// `(Σ_Q ⟨f⟩^q_{r,Q} ⟨g⟩_{(s/q)',Q} |Q|)^{1/q}` with `s = ∞` when `s` is `None`.
pub fn bilinear(f: &[f64], g: &[f64], members: &[LatticeInterval], r: f64, s: Option<f64>, q: f64) -> f64 {
    let n = f.len() as f64;
    let g_exp = match s {
        None => 1.0,
        Some(s) => {
            let e = s / q;
            e / (e - 1.0)
        }
    };
    members.iter().map(|iq| avg_r(f, iq, r).powf(q) * avg_r(g, iq, g_exp) * iq.len() as f64 / n).sum::<f64>().powf(1.0 / q)
}

/// `Σ_Q ⟨f⟩_Q ⟨g⟩_Q |Q|` exactly, for integer `f`, `g`.
pub fn bilinear_11(f: &[i128], g: &[i128], members: &[LatticeInterval], n: usize) -> BigRational {
    members
        .iter()
        .map(|iq| {
            let len = iq.len() as i128;
            rat(f[iq.cells()].iter().sum(), len) * rat(g[iq.cells()].iter().sum(), len) * rat(len, n as i128)
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

/// A random positive weight, a random density, and a sparse collection that
/// mixes two grids.
pub struct Instance {
    pub res: Resolution,
    pub w: Vec<i128>,
    pub f: Vec<i128>,
    pub members: Vec<LatticeInterval>,
    pub s: SparseCollection,
}

pub fn instance(rng: &mut ChaCha8Rng, level: u32) -> Instance {
    let res = Resolution::new(level).unwrap();
    let w = random_weight_values(rng, res);
    let f = random_density_values(rng, res);
    let fg = GridFunction::from_integers(res, f.clone(), 1).unwrap();
    let eta = Eta::rational(1, 2);
    let g1 = random_grid(rng);
    let mut members: Vec<LatticeInterval> = random_collection(rng, &fg, g1, &eta, 32).unwrap().intervals().collect();
    if rng.gen_bool(0.5) {
        let g2 = GridId::ALL[(g1.index() + 1) % 3];
        members.extend(random_collection(rng, &fg, g2, &eta, 32).unwrap().intervals());
    }
    let s = SparseCollection::new(res, eta, members.iter().copied()).unwrap();
    Instance { res, w, f, members, s }
}

pub fn to_f64(v: &[i128]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

pub const INSTANCES: u64 = 100;
const REL: f64 = 1e-12;

use sparselab::corpus::trial_rng;
use sparselab::maximal::{maximal, MaximalMode};
use sparselab::real::{Exponent, Rat64};
use sparselab::sparse::{bilinear_form, sparse_operator as lib_sparse_operator};
use sparselab::weights::{a1_constant, aprs_constant, fw_constant, FwMode, IntervalFamily, Weight};

/// Runs `check` on instance `i` at level `LEVELS[i % 3]` for every `i`,
/// stopping at the first mismatch.
pub fn over_corpus(seed: u64, check: impl Fn(u64, &Instance) -> Result<(), String>) -> Result<u64, String> {
    for i in 0..INSTANCES {
        let mut rng = trial_rng(seed, i);
        let inst = instance(&mut rng, LEVELS[(i % 3) as usize]);
        check(i, &inst).map_err(|e| format!("instance {i} (L={}): {e}", inst.res.level()))?;
    }
    Ok(INSTANCES)
}

fn weight(inst: &Instance) -> Weight {
    Weight::new(GridFunction::from_integers(inst.res, inst.w.clone(), 1).unwrap()).unwrap()
}

pub fn a1_matches(seed: u64) -> Result<u64, String> {
    over_corpus(seed, |i, inst| {
        let w = weight(inst);
        let got = exact(&a1_constant(&w, IntervalFamily::DyadicThreeGrids).value);
        let want = a1(&inst.w, &dyadic_ranges(&inst.res));
        if got != want {
            return Err(format!("dyadic [w]_1 {got} != {want}"));
        }
        // the all-interval oracle is cubic in spirit; keep it to the smaller levels
        if inst.res.level() <= 6 || i % 10 == 2 {
            let got = exact(&a1_constant(&w, IntervalFamily::AllLatticeIntervals).value);
            let want = a1(&inst.w, &all_ranges(inst.w.len()));
            if got != want {
                return Err(format!("all-interval [w]_1 {got} != {want}"));
            }
        }
        Ok(())
    })
}

pub fn aprs_matches(seed: u64) -> Result<u64, String> {
    over_corpus(seed, |i, inst| {
        let w = weight(inst);
        let wf = to_f64(&inst.w);
        let cases = [
            (Rat64::new(3, 1), Rat64::new(1, 1), Exponent::Infinite),
            (Rat64::new(2, 1), Rat64::new(1, 1), Exponent::int(4)),
            (Rat64::new(5, 2), Rat64::new(3, 2), Exponent::int(6)),
            (Rat64::new(3, 2), Rat64::new(3, 2), Exponent::int(3)),
        ];
        let (p, r, s) = cases[(i % 4) as usize];
        let inv_s = s.recip();
        let to = |x: Rat64| *x.numer() as f64 / *x.denom() as f64;
        let mut families = vec![(IntervalFamily::DyadicThreeGrids, dyadic_ranges(&inst.res))];
        if inst.res.level() <= 6 {
            families.push((IntervalFamily::AllLatticeIntervals, all_ranges(wf.len())));
        }
        for (family, ranges) in families {
            let got = aprs_constant(&w, p, r, s, family).map_err(|e| e.to_string())?.value.to_f64();
            let want = aprs(&wf, to(p), to(r), to(inv_s), &ranges);
            if !rel_close(got, want, REL) {
                return Err(format!("[w]_({p},({r},{s})) {family:?}: {got} vs {want}"));
            }
        }
        Ok(())
    })
}

pub fn fw_matches(seed: u64) -> Result<u64, String> {
    over_corpus(seed, |_, inst| {
        let got = exact(&fw_constant(&weight(inst), FwMode::Exact).value);
        let want = fw_exact(&inst.res, &inst.w);
        if got != want {
            return Err(format!("exact [w]_FW {got} != {want}"));
        }
        Ok(())
    })
}

pub fn maximal_matches(seed: u64) -> Result<u64, String> {
    over_corpus(seed, |_, inst| {
        let f = GridFunction::from_integers(inst.res, inst.f.clone(), 1).unwrap();
        let got = maximal(&f, MaximalMode::exact()).map_err(|e| e.to_string())?;
        let want = exact_maximal(&inst.f);
        for (x, v) in want.iter().enumerate() {
            if exact(&got.value(x)) != *v {
                return Err(format!("Mf at cell {x}: {} != {v}", got.value(x)));
            }
        }
        Ok(())
    })
}

pub fn sparse_operator_matches(seed: u64) -> Result<u64, String> {
    over_corpus(seed, |i, inst| {
        let f = GridFunction::from_integers(inst.res, inst.f.clone(), 1).unwrap();
        let one = Rat64::from_integer(1);
        let got = lib_sparse_operator(&inst.s, &f, one, one).map_err(|e| e.to_string())?;
        for (x, v) in sparse_operator_11(&inst.f, &inst.members).iter().enumerate() {
            if exact(&got.value(x)) != *v {
                return Err(format!("A_S f at cell {x}: {} != {v}", got.value(x)));
            }
        }
        let (r, q) = [(Rat64::new(2, 1), Rat64::new(3, 1)), (Rat64::new(3, 2), Rat64::new(1, 2)), (Rat64::new(1, 1), Rat64::new(2, 1))]
            [(i % 3) as usize];
        let to = |x: Rat64| *x.numer() as f64 / *x.denom() as f64;
        let got = lib_sparse_operator(&inst.s, &f, r, q).map_err(|e| e.to_string())?;
        let want = sparse_operator(&to_f64(&inst.f), &inst.members, to(r), to(q));
        for (x, v) in want.iter().enumerate() {
            if !rel_close(got.value_f64(x), *v, REL) {
                return Err(format!("A^{q}_{{{r},S}} f at cell {x}: {} vs {v}", got.value_f64(x)));
            }
        }
        Ok(())
    })
}

pub fn bilinear_matches(seed: u64) -> Result<u64, String> {
    over_corpus(seed, |i, inst| {
        let f = GridFunction::from_integers(inst.res, inst.f.clone(), 1).unwrap();
        let g = GridFunction::from_integers(inst.res, inst.w.clone(), 1).unwrap();
        let one = Rat64::from_integer(1);
        let got = bilinear_form(&inst.s, &f, &g, one, Exponent::Infinite, one).map_err(|e| e.to_string())?;
        let want = bilinear_11(&inst.f, &inst.w, &inst.members, inst.res.cell_count());
        if exact(&got) != want {
            return Err(format!("form {got} != {want}"));
        }
        let (r, s, q) = [(2.0, Some(4.0), 1.0), (1.0, Some(3.0), 2.0), (3.0, None, 2.0)][(i % 3) as usize];
        let sx = match s {
            Some(s) => Exponent::int(s as i64),
            None => Exponent::Infinite,
        };
        let got = bilinear_form(&inst.s, &f, &g, Rat64::from_integer(r as i64), sx, Rat64::from_integer(q as i64))
            .map_err(|e| e.to_string())?
            .to_f64();
        let want = bilinear(&to_f64(&inst.f), &to_f64(&inst.w), &inst.members, r, s, q);
        if !rel_close(got, want, REL) {
            return Err(format!("form (r={r}, s={s:?}, q={q}): {got} vs {want}"));
        }
        Ok(())
    })
}
