//! Private mean estimation over a CSV column, in the style of estimating a
//! normalized attribute mean from a census extract. Pass a path and column
//! name, or run without arguments to use a bundled synthetic age table.
//!
//! ```bash
//! cargo run --release --example csv_mean -- data.csv age
//! ```

use std::io::Write;
use std::path::PathBuf;

use shuffle_sum::harness::config::{DatasetSpec, ExperimentConfig, ProtocolSelector};
use shuffle_sum::harness::dataset::Normalizer;
use shuffle_sum::harness::run_experiment;
use shuffle_sum::RngStream;

fn main() -> shuffle_sum::Result<()> {
    let mut args = std::env::args().skip(1);
    let (path, column) = match (args.next(), args.next()) {
        (Some(p), Some(c)) => (PathBuf::from(p), c),
        _ => (synthesize_ages()?, "age".to_string()),
    };

    for protocol in [
        ProtocolSelector::Ikos,
        ProtocolSelector::CentralLaplace,
        ProtocolSelector::LocalLaplace,
    ] {
        let config = ExperimentConfig {
            protocol,
            n: 0, // taken from the file
            epsilon: 1.0,
            delta: None,
            messages: None,
            runs: 20,
            seed: 1,
            dataset: DatasetSpec::Csv {
                path: path.clone(),
                column: column.clone(),
                normalizer: Normalizer::Max,
            },
        };
        let report = run_experiment(&config)?;
        println!(
            "{:<16} n={} true mean={:.5} mean std error={:.3e} (+/- {:.1e} across {} runs)",
            report.protocol,
            report.n,
            report.true_sum / report.n as f64,
            report.mean_std_error.unwrap(),
            report.std_dev_std_error.unwrap(),
            report.runs
        );
    }
    Ok(())
}

/// Writes a synthetic age column shaped like a census sample.
fn synthesize_ages() -> shuffle_sum::Result<PathBuf> {
    let path = std::env::temp_dir().join("shuffle_sum_ages.csv");
    let mut file = std::fs::File::create(&path)?;
    writeln!(file, "age")?;
    let mut rng = RngStream::new(1234, 0);
    for _ in 0..32_561 {
        // Roughly lognormal ages clamped to a plausible range.
        let z = (rng.uniform_f64() + rng.uniform_f64() + rng.uniform_f64() - 1.5) * 2.0;
        let age = (38.0 * (0.35 * z).exp()).clamp(17.0, 90.0);
        writeln!(file, "{}", age.round() as u64)?;
    }
    eprintln!("using synthetic dataset at {}", path.display());
    Ok(path)
}
