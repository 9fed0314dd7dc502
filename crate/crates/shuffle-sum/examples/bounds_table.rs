//! Print the analytic comparison table (message counts and MSE bounds) for
//! the standard grid n in {1e4, 1e5} x eps in {0.5, 1}, delta = 1/n^2.
//!
//! ```bash
//! cargo run --example bounds_table
//! ```

use shuffle_sum::harness::table::{emit_bounds_table, rows_to_markdown, Scenario};

fn main() -> shuffle_sum::Result<()> {
    let scenarios: Vec<Scenario> = [10_000u64, 100_000]
        .iter()
        .flat_map(|&n| [Scenario::new(n, 0.5), Scenario::new(n, 1.0)])
        .collect();
    let rows = emit_bounds_table(&scenarios)?;
    print!("{}", rows_to_markdown(&rows));
    Ok(())
}
