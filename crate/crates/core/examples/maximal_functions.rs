//! Dyadic, uncentred and weight-twisted maximal functions of a spike.

use sparselab::gridfn::GridFunction;
use sparselab::lattice::{GridId, Resolution};
use sparselab::maximal::{exact_maximal_witnesses, maximal, n_weak_check, weighted_n, MaximalMode};
use sparselab::real::{Rat64, Real};
use sparselab::weights::power_weight;

fn main() -> sparselab::error::Result<()> {
    let res = Resolution::new(3)?;
    let n = res.cell_count();
    let f = GridFunction::indicator(res, n / 2..n / 2 + 1, &Real::int(24))?;

    let exact = maximal(&f, MaximalMode::exact())?;
    let witnesses = exact_maximal_witnesses(&f);
    println!("cell  f      M^D_0 f  M f      witness");
    let dyadic = maximal(&f, MaximalMode::dyadic(GridId::Zero))?;
    for (i, &(a, b)) in witnesses.iter().enumerate().take(n) {
        println!("{i:>4}  {:<6} {:<8} {:<8} [{a},{b})", f.value(i), dyadic.value(i), exact.value(i));
    }

    let w = power_weight(res, -0.5)?;
    let theta = Rat64::new(1, 2);
    let nf = weighted_n(&f, &w, theta, GridId::Third)?;
    let peak = (0..n).map(|i| nf.value_f64(i)).fold(0.0, f64::max);
    let check = n_weak_check(&f, &w, theta, GridId::Third)?;
    println!("\nsup N f = {peak:.4}");
    println!("weak-type: {:.6} <= {:.6} ({})", check.lhs.to_f64(), check.rhs.to_f64(), if check.pass { "ok" } else { "FAIL" });
    Ok(())
}
