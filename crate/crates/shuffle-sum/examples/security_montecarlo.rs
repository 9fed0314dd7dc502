//! Monte Carlo estimates of E[q^C(G)] over random permutation multigraphs,
//! checked against the closed-form bound q + q^2 (n/e)^(1-m).
//!
//! ```bash
//! cargo run --release --example security_montecarlo
//! ```

use shuffle_sum::security::{component_bound, estimate_q_power_components, max_admissible_q};
use shuffle_sum::RngStream;

fn main() -> shuffle_sum::Result<()> {
    let trials = 100_000;
    println!("{trials} trials per point\n");
    println!(
        "{:>5} {:>2} {:>13} {:>13} {:>11} {:>13}  ok",
        "n", "m", "q", "estimate", "3*ci", "bound"
    );
    let mut stream = 0;
    for &n in &[19usize, 50, 100, 1000] {
        for &m in &[3usize, 4, 5] {
            for &q in &[2.0, max_admissible_q(n as u64, m as u32)] {
                stream += 1;
                let mut rng = RngStream::new(2024, stream);
                let est = estimate_q_power_components(n, m, q, trials, &mut rng)?;
                let bound = component_bound(n as u64, m as u32, q)?;
                let ok = est.estimate <= bound + 3.0 * est.ci_halfwidth;
                println!(
                    "{:>5} {:>2} {:>13.5e} {:>13.6e} {:>11.3e} {:>13.6e}  {}",
                    n,
                    m,
                    q,
                    est.estimate,
                    3.0 * est.ci_halfwidth,
                    bound,
                    ok
                );
            }
        }
    }
    Ok(())
}
