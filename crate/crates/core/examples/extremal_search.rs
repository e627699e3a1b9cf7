//! Annealing towards configurations where the endpoint form is large
//! relative to `[w]_1 (1 + log [w]_FW)`.

use sparselab::pipelines::{extremal_search, Objective};

fn main() -> sparselab::error::Result<()> {
    for objective in ["thm-a-ratio", "prop32-ratio:3/2", "thm-c-ratio:2,4,1"] {
        let out = extremal_search(objective.parse::<Objective>()?, 7, 400, 6)?;
        let accepted = out.trajectory.iter().filter(|r| r.accepted).count();
        println!(
            "{objective:<20} start {:.4} best {:.4} ({accepted} of {} moves accepted, |S| = {})",
            out.trajectory[0].current,
            out.best,
            out.trajectory.len(),
            out.s.len()
        );
    }
    Ok(())
}
