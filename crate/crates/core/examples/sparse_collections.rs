//! Principal intervals, sparseness, sparse operators and the Carleson packing sum.

use sparselab::gridfn::GridFunction;
use sparselab::lattice::{GridId, Resolution};
use sparselab::real::{Exponent, Rat64};
use sparselab::sparse::{bilinear_form, carleson_sum, sparse_operator, stopping_time_sparse, verify_sparsity};
use sparselab::weights::power_weight;

fn main() -> sparselab::error::Result<()> {
    let res = Resolution::new(6)?;
    let n = res.cell_count();
    let vals: Vec<i128> = (0..n)
        .map(|i| {
            if i < 3 {
                400
            } else if i % 17 == 0 {
                30
            } else {
                1
            }
        })
        .collect();
    let f = GridFunction::from_integers(res, vals, 1)?;

    let s = stopping_time_sparse(&f, GridId::Zero, Rat64::from_integer(4), res.unit())?;
    let report = verify_sparsity(&s);
    println!("{} principal intervals, sparse: {}", s.len(), report.pass);
    for (q, e) in report.e_sets.iter().take(6) {
        println!("  {q}  |E_Q|/|Q| = {}/{}", e.len(), q.len());
    }

    let a = sparse_operator(&s, &f, Rat64::from_integer(1), Rat64::from_integer(1))?;
    let a2 = sparse_operator(&s, &f, Rat64::from_integer(1), Rat64::from_integer(2))?;
    println!("A_S f(0) = {:.3}, A^2_S f(0) = {:.3}", a.value_f64(0), a2.value_f64(0));

    let g = GridFunction::constant(res, &sparselab::real::Real::one())?;
    let form = bilinear_form(&s, &f, &g, Rat64::from_integer(1), Exponent::Infinite, Rat64::from_integer(1))?;
    println!("sum_Q <f>_Q <g>_Q |Q| = {}", form);

    let w = power_weight(res, -0.5)?;
    let c = carleson_sum(&s, &w, &res.unit())?;
    println!("Carleson: {:.5} <= {:.5} (ratio {:.3})", c.sum.to_f64(), c.bound.to_f64(), c.ratio);
    Ok(())
}
