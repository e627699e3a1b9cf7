//! Kolmogorov's inequality and its two-sided subset form on a weighted space.

use sparselab::gridfn::{kolmogorov_check, kolmogorov_subset, weak_norm, CellSet, GridFunction, MeasureSpec, NormConvention};
use sparselab::lattice::Resolution;
use sparselab::real::Rat64;
use sparselab::weights::{generate_weight, WeightKind};

fn main() -> sparselab::error::Result<()> {
    let res = Resolution::new(5)?;
    let n = res.cell_count();
    // f(x) ≈ 1/x, the extremal shape for L^{1,∞}
    let f = GridFunction::from_integers(res, (0..n).map(|i| (n / (i + 1)) as i128).collect(), 1)?;
    let w = generate_weight(WeightKind::DoublingRandom, 3, res)?;
    let mu = MeasureSpec::Weighted(&w);
    let p = Rat64::from_integer(1);
    println!("‖f‖_(1,∞)(w) = {:.5}", weak_norm(&f, p, mu, NormConvention::Measure, None)?.to_f64());

    let e = CellSet::from_range(0..n / 3);
    for theta in [Rat64::new(1, 4), Rat64::new(1, 2), Rat64::new(3, 4)] {
        let c = kolmogorov_check(&f, mu, &e, p, theta)?;
        println!("θ = {theta}: {:.5} <= {:.5}", c.lhs.to_f64(), c.rhs.to_f64());
    }

    let sub = kolmogorov_subset(&f, mu, &e, p, Rat64::new(1, 2))?;
    println!("\nsubset E' keeps {} of {} cells (γ = {:.4})", sub.subset.len(), e.len(), sub.gamma.to_f64());
    for (name, c) in [("μ(E)/2 ≤ μ(E')", &sub.measure), ("integral", &sub.integral), ("converse", &sub.converse)] {
        println!("  {name:<16} {:.5} <= {:.5}", c.lhs.to_f64(), c.rhs.to_f64());
    }
    Ok(())
}
