//! Run the split-and-shuffle protocol end to end on synthetic uniform data
//! and compare the empirical error against the analytic bound.
//!
//! ```bash
//! cargo run --release --example run_ikos
//! ```

use shuffle_sum::harness::config::{DatasetSpec, ExperimentConfig, ProtocolSelector};
use shuffle_sum::harness::run_experiment;

fn main() -> shuffle_sum::Result<()> {
    let config = ExperimentConfig {
        protocol: ProtocolSelector::Ikos,
        n: 10_000,
        epsilon: 1.0,
        delta: None, // 1/n^2
        messages: None,
        runs: 1000,
        seed: 7,
        dataset: DatasetSpec::Uniform,
    };
    let report = run_experiment(&config)?;
    println!("{}", report.to_json()?);

    let bound = report.analytic_mse_bound.as_f64();
    // Spread of the MSE estimate itself, for reading the comparison.
    let mse = report.empirical_mse.unwrap();
    let n = report.n as f64;
    let sq_errors: Vec<f64> = report
        .per_run_std_error
        .iter()
        .map(|se| (se * n).powi(2))
        .collect();
    let var_sq = sq_errors.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / sq_errors.len() as f64;
    let ci = 3.0 * (var_sq / sq_errors.len() as f64).sqrt();
    println!(
        "\nempirical mse {mse:.4} (+/- {ci:.2} at 3 sigma) vs analytic bound {bound:.4} over {} runs",
        report.runs
    );
    println!(
        "mean standard error {:.3e} (expected scale sqrt(bound)/n = {:.3e})",
        report.mean_std_error.unwrap(),
        bound.sqrt() / report.n as f64
    );
    Ok(())
}
