//! The restricted weak-type pipeline over a grid of exponents `(r, s, q)`.

use sparselab::corpus::{theorem_instance, trial_rng};
use sparselab::lattice::Resolution;
use sparselab::pipelines::{verify_theorem, TheoremParams};
use sparselab::real::DEFAULT_TOL;

fn main() -> sparselab::error::Result<()> {
    let res = Resolution::new(7)?;
    println!("{:<10} {:<6} {:>7} {:>10} {:>10} {:>6}", "(r,s,q)", "branch", "trials", "max ratio", "C*_univ", "green");
    for cell in ["1,inf,1", "2,inf,1", "1,4,2", "2,4,1", "2,8,4"] {
        let params: TheoremParams = cell.parse()?;
        let (mut worst, mut c_star, mut green) = (0.0f64, 0.0f64, true);
        for i in 0..20 {
            let input = theorem_instance(&mut trial_rng(17, i), res, &params, 32)?;
            let trace = verify_theorem(&params, &input, DEFAULT_TOL)?;
            worst = worst.max(trace.summary.final_ratio);
            c_star = trace.summary.c_star_univ;
            green &= trace.green();
        }
        println!("{cell:<10} {:<6} {:>7} {worst:>10.4} {c_star:>10.2} {green:>6}", format!("{:?}", params.branch()), 20);
    }
    Ok(())
}
