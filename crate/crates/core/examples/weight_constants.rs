//! Characteristics of the power weights `x^β` and the limited-range rescaling.
//!
//! ```bash
//! cargo run --release --example weight_constants
//! ```

use sparselab::lattice::Resolution;
use sparselab::real::{Exponent, Rat64};
use sparselab::weights::{aprs_constant, characteristics, limited_range_transform, power_weight, IntervalFamily};

fn main() -> sparselab::error::Result<()> {
    let res = Resolution::new(8)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "beta", "[w]_1", "fw_dyadic", "fw_exact");
    for beta in [0.0, -0.25, -0.5, -0.75, -0.9] {
        let w = power_weight(res, beta)?;
        let c = characteristics(&w, IntervalFamily::DyadicThreeGrids, true);
        let fw_exact = c.fw_exact.expect("requested").to_f64();
        println!("{beta:>6} {:>10.4} {:>10.4} {fw_exact:>10.4}", c.a1.to_f64(), c.fw_dyadic.to_f64());
    }

    // [w]_{p,(r,s)} equals [w_{r,s}]_{p_{r,s}}^{1/r - 1/s}
    let w = power_weight(res, -0.5)?;
    let (p, r, s) = (Rat64::from_integer(3), Rat64::from_integer(2), Exponent::int(6));
    let lhs = aprs_constant(&w, p, r, s, IntervalFamily::DyadicThreeGrids)?.value.to_f64();
    let (w_rs, map) = limited_range_transform(&w, r, s)?;
    let p_rs = map.p_rs(p)?;
    let inner = aprs_constant(&w_rs, p_rs, Rat64::from_integer(1), Exponent::Infinite, IntervalFamily::DyadicThreeGrids)?;
    let rhs = inner.value.to_f64().powf(1.0 / 2.0 - 1.0 / 6.0);
    println!("\n[w]_(3,(2,6)) = {lhs:.12}");
    println!("[w_rs]_{p_rs}^(1/3) = {rhs:.12}");
    Ok(())
}
