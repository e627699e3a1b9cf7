//! Step-by-step verification of the endpoint bound on one instance.
//!
//! ```bash
//! cargo run --release --example theorem_a
//! ```

use sparselab::gridfn::{weighted_norm, CellSet, GridFunction, NormConvention};
use sparselab::lattice::{GridId, Resolution};
use sparselab::pipelines::thm_a_verify;
use sparselab::real::Rat64;
use sparselab::sparse::stopping_time_sparse;
use sparselab::weights::{generate_weight, WeightKind};

fn main() -> sparselab::error::Result<()> {
    let res = Resolution::new(8)?;
    let n = res.cell_count();
    let w = generate_weight(WeightKind::DoublingRandom, 2, res)?;
    let raw = GridFunction::from_integers(res, (0..n).map(|i| ((i * 7919) % 13) as i128 + i128::from(i < 40) * 50).collect(), 1)?;
    let norm = weighted_norm(&raw, Rat64::from_integer(1), &w, NormConvention::Multiplier)?;
    let f = raw.scale(&norm.recip())?;
    let s = stopping_time_sparse(&f, GridId::Zero, Rat64::from_integer(4), res.unit())?;
    let e = CellSet::from_range(n / 8..n / 2);

    let trace = thm_a_verify(&w, &f, &s, &e)?;
    println!("{:<20} {:>14} {:>14} {:>6}  pass", "step", "lhs", "rhs", "checks");
    for step in &trace.steps {
        println!("{:<20} {:>14.6e} {:>14.6e} {:>6}  {}", step.name, step.lhs.to_f64(), step.rhs.to_f64(), step.checks, step.pass);
    }
    let sm = &trace.summary;
    println!("\n|S| = {}, t = {:.4}, γ = {:.4}", s.len(), sm.t, sm.gamma.to_f64());
    println!("w(E') / w(E) = {:.4}", (&sm.measures.e_prime / &sm.measures.e).to_f64());
    println!("form = {:.6}, [w]_1 (1 + log fw) = {:.6}, ratio {:.4}", sm.form.to_f64(), sm.target.to_f64(), sm.final_ratio);
    println!("C*_run = {:.3}, C*_univ = {:.3}, green: {}", sm.c_star_run, sm.c_star_univ, trace.green());
    Ok(())
}
