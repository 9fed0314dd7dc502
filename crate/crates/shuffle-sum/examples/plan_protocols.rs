//! Plan parameters for every protocol at one scenario and print what the
//! planners produce, including infeasible outcomes.
//!
//! ```bash
//! cargo run --example plan_protocols
//! ```

use shuffle_sum::harness::config::ProtocolSelector;
use shuffle_sum::harness::plan_mechanism;
use shuffle_sum::ikos::plan_ikos;
use shuffle_sum::recursive::{optimize_recursive_params, plan_recursive_basic};

fn main() -> shuffle_sum::Result<()> {
    let (n, epsilon) = (10_000u64, 1.0);
    let delta = 1.0 / (n as f64 * n as f64);
    println!("scenario: n={n}, eps={epsilon}, delta={delta:e}\n");

    for selector in ProtocolSelector::ALL {
        let planned = plan_mechanism(selector, n, epsilon, delta, Some(2))?;
        println!(
            "{:<16} messages={:<4} bound={:<12} feasible={}",
            planned.name,
            planned
                .messages
                .map_or("-".to_string(), |m| m.to_string()),
            planned.bound.to_string(),
            planned.runner.is_some()
        );
    }

    println!("\nikos plan in detail:");
    let ikos = plan_ikos(epsilon, delta, n)?;
    println!(
        "  p={} q={} alpha={:.6} sigma={:.2} shares={} (+1 unshuffled)",
        ikos.p,
        ikos.q,
        ikos.alpha,
        ikos.sigma,
        ikos.m_total - 1
    );

    println!("\nrecursive plans at a feasible scenario (n=100000, eps=1):");
    let basic = plan_recursive_basic(1.0, 1e-10, 100_000, 2)?;
    println!(
        "  basic:     p={:?} gamma={:?}",
        basic.precisions, basic.gammas
    );
    let optimized = optimize_recursive_params(1.0, 1e-10, 100_000, 2)?;
    println!(
        "  optimized: p={:?} gamma={:?} eps={:?}",
        optimized.precisions, optimized.gammas, optimized.epsilons
    );
    Ok(())
}
