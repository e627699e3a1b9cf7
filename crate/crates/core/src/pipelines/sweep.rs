//! How the measured weak-type ratio of sparse operators tracks
//! `[w]_1 (1 + log [w]_FW)` along a weight family.

use std::io::Write;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::trial_rng;
use crate::error::{Error, Result};
use crate::gridfn::{weak_norm, weighted_norm, GridFunction, MeasureSpec, NormConvention};
use crate::lattice::{GridId, Resolution};
use crate::real::{Rat64, Real};
use crate::sparse::{sparse_operator, stopping_time_sparse, SparseCollection};
use crate::weights::{a1_constant, fw_constant, power_weight, FwMode, IntervalFamily, Weight};

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub a1: f64,
    pub fw_dyadic: f64,
    pub fw_exact: f64,
    /// `sup_f ‖A_S f‖_{L^{1,∞}(w)} / ‖f‖_{L¹_w}` over the function corpus.
    pub measured: f64,
    /// `[w]_1 (1 + log [w]_FW)` with the dyadic constant.
    pub bound: f64,
}

/// One row per `eps`: the weight `family(eps)`, and the worst ratio over
/// `trials` functions drawn by `f_gen`, each paired with a collection from
/// `s_gen`. Trial `i` of every row uses the same RNG stream.
pub fn log_sweep(
    family: impl Fn(f64) -> Result<Weight>,
    eps_list: &[f64],
    s_gen: impl Fn(&mut ChaCha8Rng, &GridFunction) -> Result<SparseCollection>,
    f_gen: impl Fn(&mut ChaCha8Rng, Resolution) -> Result<GridFunction>,
    seed: u64,
    trials: usize,
) -> Result<Vec<SweepRow>> {
    let one = Rat64::from_integer(1);
    eps_list
        .iter()
        .map(|&eps| {
            let w = family(eps)?;
            let res = w.resolution();
            let a1 = a1_constant(&w, IntervalFamily::DyadicThreeGrids).value.to_f64();
            let fw_dyadic = fw_constant(&w, FwMode::Dyadic).value.to_f64();
            let fw_exact = fw_constant(&w, FwMode::Exact).value.to_f64();
            let mut measured = 0.0f64;
            for i in 0..trials {
                let mut rng = trial_rng(seed, i as u64);
                let f = f_gen(&mut rng, res)?;
                let s = s_gen(&mut rng, &f)?;
                let a = sparse_operator(&s, &f, one, one)?;
                let lhs = weak_norm(&a, one, MeasureSpec::Weighted(&w), NormConvention::Measure, None)?;
                let norm = weighted_norm(&f, one, &w, NormConvention::Measure)?;
                measured = measured.max(lhs.to_f64() / norm.to_f64());
            }
            Ok(SweepRow { eps, a1, fw_dyadic, fw_exact, measured, bound: a1 * (1.0 + fw_dyadic.ln()) })
        })
        .collect()
}

/// The sweep over `x^{eps−1}` at level `level`, with functions concentrated
/// near the origin and their principal intervals (`3/4`-sparse) on grid 0.
pub fn power_sweep(level: u32, eps_list: &[f64], seed: u64, trials: usize) -> Result<Vec<SweepRow>> {
    let res = Resolution::new(level)?;
    log_sweep(
        |eps| power_weight(res, eps - 1.0),
        eps_list,
        |_, f| {
            let root = res.unit();
            stopping_time_sparse(f, GridId::Zero, Rat64::from_integer(4), root)
        },
        |rng, res| {
            use rand::Rng;
            let n = res.cell_count();
            let len = 1usize << rng.gen_range(0..=res.level());
            let len = (3 * len).min(n);
            let start = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..=n - len) };
            GridFunction::indicator(res, start..start + len, &Real::one())
        },
        seed,
        trials,
    )
}

pub const SWEEP_HEADER: [&str; 6] = ["eps", "a1", "fw_dyadic", "fw_exact", "measured", "bound"];

/// Writes the rows as CSV with the fixed header.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Malformed(format!("CSV output failed: {e}"));
    wr.write_record(SWEEP_HEADER).map_err(io)?;
    for r in rows {
        wr.write_record([r.eps, r.a1, r.fw_dyadic, r.fw_exact, r.measured, r.bound].map(|x| format!("{x:.12e}"))).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Malformed(format!("CSV output failed: {e}")))?;
    Ok(())
}
