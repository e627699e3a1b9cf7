//! The disjointness selection for each admissible θ.
//!
//! The hypothesis `Σ_{ch(Q)} |Q'| ≤ ((1−θ)/4)^{1/(1−θ)}|Q|` forces children
//! very deep below their parents as θ grows, so the resolution grows with θ.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparselab::corpus::{admissible_budget, random_density, random_weight};
use sparselab::lattice::{GridId, Resolution};
use sparselab::real::{Rat64, Real};
use sparselab::sparse::{magic_selection, random_sparse, Eta};

fn main() -> sparselab::error::Result<()> {
    for (theta, level) in [(Rat64::new(0, 1), 8), (Rat64::new(1, 4), 8), (Rat64::new(1, 2), 10), (Rat64::new(3, 4), 17)] {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let res = Resolution::new(level)?;
        let eta = Eta::magic(theta)?;
        let budget = admissible_budget(&eta);
        let f = random_density(&mut rng, res)?;
        let w = random_weight(&mut rng, res)?;
        let s = random_sparse(&mut rng, res, GridId::Zero, budget, 64)?.with_eta(eta)?;
        // λ puts the root inside its own band (λ⟨w⟩^θ, 2λ⟨w⟩^θ]
        let root = s.intervals().next().expect("nonempty");
        let lambda = f.mean(root.cells()) * w.density().mean(root.cells()).pow(-theta) / Real::frac(3, 2);
        let out = magic_selection(&s, &f, &w, &lambda, theta)?;
        println!(
            "θ = {theta:<3} L = {level:<2} budget {budget:<8} |S| = {:<3} selected {:<3} disjoint {} half {:.3} conclusion {:.3}",
            s.len(),
            out.selected.len(),
            out.disjoint,
            out.half.ratio(),
            out.conclusion.ratio()
        );
    }
    Ok(())
}
