//! Measured weak-type ratio against `[w]_1 (1 + log [w]_FW)` for `x^{ε−1}`.
//!
//! ```bash
//! cargo run --release --example log_sweep > sweep.csv
//! ```

use sparselab::pipelines::{power_sweep, write_sweep_csv};

fn main() -> sparselab::error::Result<()> {
    let rows = power_sweep(10, &[1.0, 0.5, 0.1, 0.01, 0.001], 9, 40)?;
    write_sweep_csv(&rows, std::io::stdout().lock())?;
    for r in &rows {
        eprintln!("eps {:<6} measured/bound = {:.4}", r.eps, r.measured / r.bound);
    }
    Ok(())
}
