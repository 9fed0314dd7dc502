//! Coordinate-descent tuning of the recursive protocol's per-level
//! precisions and budget split, compared against the evenly-split plan on a
//! grid of scenarios.
//!
//! ```bash
//! cargo run --example optimize_recursive
//! ```

use shuffle_sum::recursive::{mse_bound_recursive, optimize_recursive_params, plan_recursive_basic};
use shuffle_sum::Error;

fn main() -> shuffle_sum::Result<()> {
    println!(
        "{:>9} {:>5} {:>3} {:>14} {:>14} {:>8}",
        "n", "eps", "m", "basic bound", "optimized", "gain"
    );
    for &n in &[100_000u64, 1_000_000, 10_000_000] {
        for &epsilon in &[1.0, 1.5, 2.0] {
            for m in [2usize, 3] {
                let delta = 1.0 / (n as f64 * n as f64);
                let basic = match plan_recursive_basic(epsilon, delta, n, m) {
                    Ok(p) => Some(mse_bound_recursive(&p)),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e),
                };
                let optimized = match optimize_recursive_params(epsilon, delta, n, m) {
                    Ok(p) => Some(mse_bound_recursive(&p)),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e),
                };
                let fmt = |b: Option<f64>| b.map_or("inf".to_string(), |v| format!("{v:.1}"));
                let gain = match (basic, optimized) {
                    (Some(b), Some(o)) => format!("{:.1}x", b / o),
                    _ => "-".to_string(),
                };
                println!(
                    "{:>9} {:>5} {:>3} {:>14} {:>14} {:>8}",
                    n,
                    epsilon,
                    m,
                    fmt(basic),
                    fmt(optimized),
                    gain
                );
            }
        }
    }
    Ok(())
}
