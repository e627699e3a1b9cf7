//! Seeded instance generators.
//!
//! Every generator draws from a [`ChaCha8Rng`]; [`trial_rng`] keys the
//! stream by `(seed, trial)` so that a corpus of `n` trials is a prefix of the
//! corpus of `n + 1` trials.

use num::traits::One;
use num::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};
use crate::gridfn::{CellSet, GridFunction};
use crate::lattice::{GridId, Resolution};
use crate::pipelines::{TheoremInput, TheoremParams};
use crate::real::Rat64;
use crate::sparse::{random_sparse, stopping_time_sparse, Eta, SparseCollection};
use crate::weights::{cascade, Weight};

/// The RNG of trial `index` under master seed `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Positive integer cell values: constant, a two-level step, or a
/// multiplicative cascade.
pub fn random_weight_values(rng: &mut ChaCha8Rng, res: Resolution) -> Vec<i128> {
    let n = res.cell_count();
    match rng.gen_range(0..5) {
        0 => vec![1; n],
        1 => {
            let cut = rng.gen_range(1..n);
            let (a, b) = (rng.gen_range(1..=8i128), rng.gen_range(1..=8i128));
            (0..n).map(|i| if i < cut { a } else { b }).collect()
        }
        2 => cascade(rng, res, 3),
        _ => cascade(rng, res, 2),
    }
}

pub fn random_weight(rng: &mut ChaCha8Rng, res: Resolution) -> Result<Weight> {
    let vals = random_weight_values(rng, res);
    Weight::new(GridFunction::from_integers(res, vals, 1)?)
}

/// Nonnegative integer values, not all zero: uniform noise, spikes on a
/// sparse background, or a single bump.
pub fn random_density_values(rng: &mut ChaCha8Rng, res: Resolution) -> Vec<i128> {
    let n = res.cell_count();
    let mut vals: Vec<i128> = match rng.gen_range(0..3) {
        0 => (0..n).map(|_| rng.gen_range(0..=9)).collect(),
        1 => {
            let mut v: Vec<i128> = (0..n).map(|_| i128::from(rng.gen_bool(0.2))).collect();
            for _ in 0..rng.gen_range(1..=4) {
                let c = rng.gen_range(0..n);
                v[c] += rng.gen_range(10..=1000);
            }
            v
        }
        _ => {
            let len = rng.gen_range(1..=n.div_ceil(4));
            let start = rng.gen_range(0..=n - len);
            let h = rng.gen_range(1..=20);
            (0..n).map(|i| if (start..start + len).contains(&i) { h } else { 0 }).collect()
        }
    };
    if vals.iter().all(|&x| x == 0) {
        let c = rng.gen_range(0..n);
        vals[c] = 1;
    }
    vals
}

pub fn random_density(rng: &mut ChaCha8Rng, res: Resolution) -> Result<GridFunction> {
    let vals = random_density_values(rng, res);
    GridFunction::from_integers(res, vals, 1)
}

/// A nonempty cell set: everything, one interval of cells, or a random mask.
pub fn random_cells(rng: &mut ChaCha8Rng, res: Resolution) -> CellSet {
    let n = res.cell_count();
    match rng.gen_range(0..3) {
        0 => CellSet::full(&res),
        1 => {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(a + 1..=n);
            CellSet::from_range(a..b)
        }
        _ => {
            let p = rng.gen_range(0.05..0.9);
            let mut mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
            let c = rng.gen_range(0..n);
            mask[c] = true;
            CellSet::from_mask(&mask)
        }
    }
}

pub fn random_grid(rng: &mut ChaCha8Rng) -> GridId {
    *GridId::ALL.choose(rng).expect("three grids")
}

/// The largest `1/m` (integer `m ≥ 2`) admitted as a children fraction by `eta`.
pub fn admissible_budget(eta: &Eta) -> Rat64 {
    let guess = (1.0 / eta.budget().to_f64()).ceil().max(2.0) as i64;
    let mut m = (guess - 1).max(2);
    while !eta.admits(&BigRational::new(One::one(), m.into())) {
        m += 1;
    }
    Rat64::new(1, m)
}

/// A single-grid collection whose children fractions are admitted by `eta`:
/// either random dyadic descendants or the principal intervals of `f`,
/// keeping at most `max_members` of the coarsest members.
pub fn random_collection(rng: &mut ChaCha8Rng, f: &GridFunction, grid: GridId, eta: &Eta, max_members: usize) -> Result<SparseCollection> {
    let res = f.resolution();
    let budget = admissible_budget(eta);
    let principal = rng.gen_bool(0.5);
    let s = if principal {
        let root = (0..=res.level()).find_map(|j| {
            let mut cands: Vec<_> = res.intervals_at(grid, j).filter(|q| f.integral(q.cells()).is_positive()).collect();
            cands.sort();
            (!cands.is_empty()).then(|| cands[rng.gen_range(0..cands.len())])
        });
        match root {
            Some(root) => stopping_time_sparse(f, grid, budget.recip(), root)?,
            None => random_sparse(rng, res, grid, budget, max_members)?,
        }
    } else {
        random_sparse(rng, res, grid, budget, max_members)?
    };
    let mut members: Vec<_> = s.intervals().collect();
    members.sort_by_key(|q| (q.scale(), q.translation()));
    members.truncate(max_members);
    SparseCollection::new(res, eta.clone(), members)
}

/// `(v, h)` with `v = u^m` and `h ∝ raw` scaled so that `∫ h v^{1−r/s} = 1`
/// exactly, where `m` is the denominator of `1 − r/s`.
pub fn exact_pair(res: Resolution, params: &TheoremParams, u: &[i128], raw: &[i128]) -> Result<(Weight, GridFunction)> {
    let one_m_theta = Rat64::one() - params.theta();
    let (a, m) = (*one_m_theta.numer() as u32, *one_m_theta.denom() as u32);
    let v_vals: Vec<i128> = u.iter().map(|x| x.pow(m)).collect();
    let v = Weight::new(GridFunction::from_integers(res, v_vals, 1)?)?;
    let mass: i128 = raw.iter().zip(u).map(|(h, x)| h * x.pow(a)).sum();
    if mass <= 0 {
        return param("density must have positive mass");
    }
    let n = res.cell_count() as i128;
    let h = GridFunction::from_rationals(res, raw.iter().map(|&x| BigRational::new((x * n).into(), mass.into())).collect())?;
    Ok((v, h))
}

/// A theorem instance for `params`: `v = u^m` for an integer weight `u`
/// (a cascade when `m > 1`) and `h` normalised exactly, see [`exact_pair`].
pub fn theorem_instance(rng: &mut ChaCha8Rng, res: Resolution, params: &TheoremParams, max_members: usize) -> Result<TheoremInput> {
    let m = *(Rat64::one() - params.theta()).denom();
    let u = if m == 1 { random_weight_values(rng, res) } else { cascade(rng, res, 2) };
    let raw = random_density_values(rng, res);
    let (v, h) = exact_pair(res, params, &u, &raw)?;
    let grid = random_grid(rng);
    let s = random_collection(rng, &h, grid, &params.eta(), max_members)?;
    let mut e = random_cells(rng, res);
    if v.measure_set(&e).is_zero() {
        e = CellSet::full(&res);
    }
    Ok(TheoremInput { v, h, s, e })
}
