//! The distributed-noise identity behind the constant-error protocol: the
//! sum of n Pólya(1/n, alpha) differences is one discrete Laplace draw.
//! Demonstrated with a chi-square goodness-of-fit test.
//!
//! ```bash
//! cargo run --release --example polya_divisibility
//! ```

use shuffle_sum::sampling::{sample_discrete_laplace, sample_polya};
use shuffle_sum::stats::{discrete_laplace_gof, RunningMoments};
use shuffle_sum::RngStream;

fn main() -> shuffle_sum::Result<()> {
    let trials = 100_000usize;
    for (n, alpha) in [(100usize, 0.5f64), (100, 0.9), (1000, 0.5)] {
        let mut rng = RngStream::new(7, n as u64 + (alpha * 10.0) as u64);
        let shape = 1.0 / n as f64;
        let samples: Vec<i64> = (0..trials)
            .map(|_| {
                let mut z = 0i64;
                for _ in 0..n {
                    z += sample_polya(shape, alpha, &mut rng)? as i64;
                    z -= sample_polya(shape, alpha, &mut rng)? as i64;
                }
                Ok(z)
            })
            .collect::<shuffle_sum::Result<_>>()?;
        let gof = discrete_laplace_gof(&samples, alpha);
        let mut m = RunningMoments::new();
        for &s in &samples {
            m.push(s as f64);
        }
        println!(
            "n={n:<5} alpha={alpha}: sample var {:.3} (dlap var {:.3}), gof p = {:.3}",
            m.variance(),
            2.0 * alpha / (1.0 - alpha).powi(2),
            gof.p_value
        );
    }

    // The direct sampler agrees, for reference.
    let mut rng = RngStream::new(100, 0);
    let direct: Vec<i64> = (0..trials)
        .map(|_| sample_discrete_laplace(0.9, &mut rng))
        .collect::<shuffle_sum::Result<_>>()?;
    let gof = discrete_laplace_gof(&direct, 0.9);
    println!("direct discrete-laplace sampler at alpha=0.9: gof p = {:.3}", gof.p_value);
    Ok(())
}
