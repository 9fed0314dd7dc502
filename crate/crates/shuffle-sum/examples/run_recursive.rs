//! Run the recursive protocol on normally distributed data, with planner
//! parameters and with optimizer parameters, and compare their bounds.
//!
//! ```bash
//! cargo run --release --example run_recursive
//! ```

use shuffle_sum::harness::config::{DatasetSpec, ExperimentConfig, ProtocolSelector};
use shuffle_sum::harness::run_experiment;
use shuffle_sum::recursive::{
    mse_bound_recursive, optimize_recursive_params, plan_recursive_basic, RecursiveParams,
};
use shuffle_sum::single::mse_worst_case_single;

/// Composition of the exact per-level worst-case errors. The closed-form
/// bound budgets a decoy spanning p points while the randomizer's decoy
/// spans p+1, so observed errors can land between the two; this one always
/// dominates.
fn exact_composition(params: &RecursiveParams) -> f64 {
    let q = params.precision_products();
    let m = params.messages();
    params.n as f64 / (4.0 * q[m - 1] * q[m - 1])
        + (0..m)
            .map(|j| {
                mse_worst_case_single(params.gammas[j], params.level_domain(j), params.n)
                    / (q[j] * q[j])
            })
            .sum::<f64>()
}

fn main() -> shuffle_sum::Result<()> {
    // A budget where the evenly-split plan is feasible at this size.
    let (n, epsilon, delta) = (1000u64, 2.0, 0.01);

    for (label, params) in [
        ("basic", plan_recursive_basic(epsilon, delta, n, 2)?),
        ("optimized", optimize_recursive_params(epsilon, delta, n, 2)?),
    ] {
        println!(
            "{label:<9} plan: p={:?} gamma={:.3?} closed-form bound={:.1} exact composition={:.1}",
            params.precisions,
            params.gammas,
            mse_bound_recursive(&params),
            exact_composition(&params)
        );
    }

    for protocol in [ProtocolSelector::Recursive, ProtocolSelector::RecursiveOpt] {
        let config = ExperimentConfig {
            protocol,
            n,
            epsilon,
            delta: Some(delta),
            messages: Some(2),
            runs: 200,
            seed: 3,
            dataset: DatasetSpec::Normal {
                mean: 0.573,
                std: 0.1,
            },
        };
        let report = run_experiment(&config)?;
        println!(
            "\n{}: empirical mse {:.1}, closed-form bound {} ({} runs, mean se {:.2e})",
            report.protocol,
            report.empirical_mse.unwrap(),
            report.analytic_mse_bound,
            report.runs,
            report.mean_std_error.unwrap()
        );
    }
    Ok(())
}
