//! Central- and local-model reference mechanisms for the comparison table:
//! the Laplace mechanism as a trusted curator would run it, per-user Laplace
//! noise, and binary randomized response over randomized-rounded bits.

use crate::error::{Error, Result};
use crate::sampling::{bernoulli, randomized_round, RngStream};

/// The reference mechanisms by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    CentralLaplace,
    LocalLaplace,
    LocalRandomizedResponse,
}

/// One continuous Laplace(0, scale) draw by inverse CDF.
pub fn sample_laplace(scale: f64, rng: &mut RngStream) -> f64 {
    let u = rng.uniform_f64() - 0.5;
    -u.signum() * scale * (1.0 - 2.0 * u.abs()).ln()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Curator mechanism: the exact sum plus one Laplace(1/eps) draw.
pub fn central_laplace(inputs: &[f64], epsilon: f64, rng: &mut RngStream) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(inputs.iter().sum::<f64>() + sample_laplace(1.0 / epsilon, rng))
}

/// MSE of the curator mechanism: `2/eps^2`.
pub fn mse_central_laplace(epsilon: f64) -> f64 {
    2.0 / (epsilon * epsilon)
}

/// Local model with continuous noise: per-user Laplace(1/eps), summed.
pub fn local_laplace(inputs: &[f64], epsilon: f64, rng: &mut RngStream) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(inputs
        .iter()
        .map(|&x| x + sample_laplace(1.0 / epsilon, rng))
        .sum())
}

/// MSE of the local Laplace mechanism: `2n/eps^2`.
pub fn mse_local_laplace(n: u64, epsilon: f64) -> f64 {
    2.0 * n as f64 / (epsilon * epsilon)
}

/// Binary randomized response: each input is rounded to a bit without bias,
/// the bit is reported truthfully with probability `e^eps/(1+e^eps)`, and
/// the analyzer debiases and sums.
pub fn local_randomized_response(inputs: &[f64], epsilon: f64, rng: &mut RngStream) -> Result<f64> {
    check_epsilon(epsilon)?;
    let truthful = epsilon.exp() / (1.0 + epsilon.exp());
    let mut total = 0.0;
    for &x in inputs {
        let bit = randomized_round(x, 1, rng)?.value;
        let keep = bernoulli(truthful, rng)? == 1;
        let report = if keep { bit } else { 1 - bit } as f64;
        // E[report] = (2t - 1) bit + (1 - t); invert per user.
        total += (report - (1.0 - truthful)) / (2.0 * truthful - 1.0);
    }
    Ok(total)
}

/// Worst-case MSE of debiased binary randomized response plus the rounding
/// variance: `n (e^eps/(e^eps - 1)^2 + 1/4)`.
pub fn mse_local_randomized_response(n: u64, epsilon: f64) -> f64 {
    let e = epsilon.exp();
    n as f64 * (e / (e - 1.0).powi(2) + 0.25)
}
