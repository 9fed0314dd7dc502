//! The one-level discrete summation subprotocol: randomized response over
//! `{0, ..., p}` with a debiasing analyzer, its feasibility planner and its
//! closed-form error bound. This is the building block the recursive
//! protocol stacks per digit.

use crate::error::{Error, Result};
use crate::sampling::{bernoulli, uniform_int, RngStream};
use crate::shuffle::{ShuffleProtocol, View};

/// Which constant the analyzer subtracts per decoy message.
///
/// The decoy is uniform on `{0, ..., p}`, whose mean is `p/2`; `Exact` uses
/// that and keeps the analyzer unbiased. `Shifted` subtracts `(p+1)/2`
/// instead, the midpoint of a `p`-point domain, and is kept selectable
/// because the debiasing step is sometimes written that way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DebiasMode {
    #[default]
    Exact,
    Shifted,
}

/// Parameters of one randomized-response level.
#[derive(Debug, Clone)]
pub struct SingleParams {
    pub n: u64,
    /// Domain is `{0, ..., p}`.
    pub p: u64,
    /// Probability of submitting a uniform decoy instead of the true value.
    pub gamma: f64,
    /// Privacy budget the planner consumed, when planned.
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub debias: DebiasMode,
}

impl SingleParams {
    /// Hand-built parameters (no planner); validates `gamma` and `p`.
    pub fn new(gamma: f64, p: u64, n: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "randomized-response rate must be in [0,1), got {gamma}"
            )));
        }
        if p == 0 || n == 0 {
            return Err(Error::InvalidParameter(
                "precision and user count must be positive".into(),
            ));
        }
        Ok(SingleParams {
            n,
            p,
            gamma,
            epsilon: None,
            delta: None,
            debias: DebiasMode::Exact,
        })
    }

    pub fn with_debias(mut self, mode: DebiasMode) -> Self {
        self.debias = mode;
        self
    }
}

/// Local randomizer: submits `xbar` with probability `1 - gamma`, otherwise
/// a uniform decoy from `{0, ..., p}`.
pub fn rr_randomize(xbar: u64, params: &SingleParams, rng: &mut RngStream) -> Result<u64> {
    if xbar > params.p {
        return Err(Error::Protocol(format!(
            "randomized-response input {xbar} outside {{0..{}}}",
            params.p
        )));
    }
    if bernoulli(params.gamma, rng)? == 1 {
        Ok(uniform_int(0, params.p as i64, rng)? as u64)
    } else {
        Ok(xbar)
    }
}

/// Analyzer: sums the `n` messages and removes the decoy bias, returning an
/// unbiased estimate of the sum of the true values (in `Exact` mode).
pub fn rr_analyze(messages: &[u64], params: &SingleParams) -> Result<f64> {
    if messages.len() as u64 != params.n {
        return Err(Error::Protocol(format!(
            "analyzer expected {} messages, got {}",
            params.n,
            messages.len()
        )));
    }
    if let Some(&bad) = messages.iter().find(|&&m| m > params.p) {
        return Err(Error::Protocol(format!(
            "message {bad} outside {{0..{}}}",
            params.p
        )));
    }
    let w: u64 = messages.iter().sum();
    let decoy_mean = match params.debias {
        DebiasMode::Exact => params.p as f64 / 2.0,
        DebiasMode::Shifted => (params.p + 1) as f64 / 2.0,
    };
    Ok((w as f64 - params.n as f64 * params.gamma * decoy_mean) / (1.0 - params.gamma))
}

/// Feasibility planner: the smallest valid decoy rate
/// `gamma = max(14 p ln(2/delta) / ((n-1) eps^2), 27 p / ((n-1) eps))`,
/// valid for `eps <= 1`. Returns [`Error::Infeasible`] when the required
/// rate reaches 1, which bound tables render as `inf`.
pub fn plan_single(epsilon: f64, delta: f64, n: u64, p: u64) -> Result<SingleParams> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "single-level planner requires 0 < epsilon <= 1, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be in (0,1), got {delta}"
        )));
    }
    if n < 2 || p == 0 {
        return Err(Error::InvalidParameter(
            "planner requires n >= 2 and p >= 1".into(),
        ));
    }
    let gamma = required_gamma(epsilon, delta, n, p);
    if gamma >= 1.0 {
        return Err(Error::Infeasible(format!(
            "required decoy rate {gamma:.4} >= 1 at (eps={epsilon}, delta={delta}, n={n}, p={p})"
        )));
    }
    Ok(SingleParams {
        n,
        p,
        gamma,
        epsilon: Some(epsilon),
        delta: Some(delta),
        debias: DebiasMode::Exact,
    })
}

/// The planner's decoy rate before the feasibility check. Natural logarithm:
/// the constants 14 and 27 come from an analysis in natural logs.
pub fn required_gamma(epsilon: f64, delta: f64, n: u64, p: u64) -> f64 {
    let n1 = (n - 1) as f64;
    let p = p as f64;
    let privacy = 14.0 * p * (2.0 / delta).ln() / (n1 * epsilon * epsilon);
    let concentration = 27.0 * p / (n1 * epsilon);
    privacy.max(concentration)
}

/// Closed-form error bound for the planned subprotocol:
/// `n/(1-g)^2 * (g (p^2-1)/12 + (p-1)^2 g (1-g)/4)`.
///
/// Note the two inner terms correspond to a decoy spanning `p` points; the
/// randomizer's decoy actually spans `p+1` points, so inputs at the extreme
/// ends of the domain can exceed this value (see
/// [`mse_worst_case_single`]). For interior inputs it is an upper bound.
pub fn mse_bound_single(params: &SingleParams) -> f64 {
    mse_bound_single_raw(params.gamma, params.p, params.n)
}

pub fn mse_bound_single_raw(gamma: f64, p: u64, n: u64) -> f64 {
    if gamma >= 1.0 {
        return f64::INFINITY;
    }
    if gamma == 0.0 {
        return 0.0;
    }
    let p = p as f64;
    let n = n as f64;
    n / (1.0 - gamma).powi(2)
        * (gamma * (p * p - 1.0) / 12.0 + (p - 1.0).powi(2) * gamma * (1.0 - gamma) / 4.0)
}

/// Exact worst-case mean squared error of the subprotocol with `Exact`
/// debiasing, maximized over constant inputs (attained at `xbar = 0` or
/// `p`): `n/(1-g)^2 * (g p (p+2)/12 + g(1-g) p^2/4)`. Always a valid upper
/// bound for the uniform-decoy randomizer; used by tests as the ground
/// truth the Monte Carlo estimates must match.
pub fn mse_worst_case_single(gamma: f64, p: u64, n: u64) -> f64 {
    if gamma >= 1.0 {
        return f64::INFINITY;
    }
    let p = p as f64;
    let n = n as f64;
    n / (1.0 - gamma).powi(2)
        * (gamma * p * (p + 2.0) / 12.0 + gamma * (1.0 - gamma) * p * p / 4.0)
}

/// The subprotocol as a runnable shuffle protocol over discrete inputs.
#[derive(Debug, Clone)]
pub struct SingleMessageProtocol {
    pub params: SingleParams,
}

impl ShuffleProtocol for SingleMessageProtocol {
    type Input = u64;
    type Message = u64;

    fn name(&self) -> &str {
        "single-message-rr"
    }

    fn message_count(&self) -> usize {
        1
    }

    fn randomize(&self, input: &u64, rng: &mut RngStream) -> Result<Vec<u64>> {
        Ok(vec![rr_randomize(*input, &self.params, rng)?])
    }

    fn analyze(&self, view: &View<u64>) -> Result<f64> {
        rr_analyze(view.column(0), &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shuffle::execute;
    use crate::stats::{chi_square_gof, RunningMoments};

    fn rng(stream: u64) -> RngStream {
        RngStream::new(0x517e_0001, stream)
    }

    #[test]
    fn randomize_degenerate_rates() {
        let mut r = rng(0);
        let truthful = SingleParams::new(0.0, 10, 1).unwrap();
        for x in 0..=10u64 {
            assert_eq!(rr_randomize(x, &truthful, &mut r).unwrap(), x);
        }
        assert!(rr_randomize(11, &truthful, &mut r).is_err());
        assert!(SingleParams::new(1.0, 10, 1).is_err());
    }

    #[test]
    fn randomize_all_decoys_is_uniform() {
        // Params require gamma < 1; 1 - 1e-15 never takes the truthful
        // branch over this many draws.
        let mut r = rng(1);
        let params = SingleParams::new(1.0 - 1e-15, 10, 1).unwrap();
        let n = 1_000_000usize;
        let mut counts = vec![0u64; 11];
        for _ in 0..n {
            counts[rr_randomize(4, &params, &mut r).unwrap() as usize] += 1;
        }
        let gof = chi_square_gof(&counts, &[1.0 / 11.0; 11]);
        assert!(gof.p_value > 0.01, "p={}", gof.p_value);
    }

    #[test]
    fn randomize_mixture_probability() {
        // gamma=0.5, xbar=0, p=1: P[0] = (1-g) + g/2 = 0.75.
        let mut r = rng(2);
        let params = SingleParams::new(0.5, 1, 1).unwrap();
        let n = 1_000_000u64;
        let zeros: u64 = (0..n)
            .map(|_| u64::from(rr_randomize(0, &params, &mut r).unwrap() == 0))
            .sum();
        let p = zeros as f64 / n as f64;
        let ci = 3.0 * (0.75f64 * 0.25 / n as f64).sqrt();
        assert!((p - 0.75).abs() < ci, "p={p}");
    }

    #[test]
    fn analyze_identity_at_zero_rate() {
        let params = SingleParams::new(0.0, 10, 3).unwrap();
        assert_eq!(rr_analyze(&[2, 3, 5], &params).unwrap(), 10.0);
    }

    #[test]
    fn analyze_shifted_constant() {
        // w=550, n=100, gamma=0.1, p=10 with the (p+1)/2 constant:
        // (550 - 100*0.1*5.5)/0.9 = 550.
        let params = SingleParams::new(0.1, 10, 100)
            .unwrap()
            .with_debias(DebiasMode::Shifted);
        let mut messages = vec![10u64; 50];
        messages.extend(vec![1u64; 50]);
        assert_eq!(messages.iter().sum::<u64>(), 550);
        let z = rr_analyze(&messages, &params).unwrap();
        assert!((z - 550.0).abs() < 1e-9, "z={z}");
    }

    #[test]
    fn analyze_rejects_malformed_input() {
        let params = SingleParams::new(0.1, 10, 3).unwrap();
        assert!(rr_analyze(&[1, 2], &params).is_err());
        assert!(rr_analyze(&[1, 2, 11], &params).is_err());
    }

    #[test]
    fn end_to_end_unbiased() {
        let mut r = rng(3);
        let params = SingleParams::new(0.2, 10, 50).unwrap();
        let protocol = SingleMessageProtocol {
            params: params.clone(),
        };
        let inputs: Vec<u64> = (0..50).map(|i| i % 11).collect();
        let true_sum: u64 = inputs.iter().sum();
        let trials = 100_000usize;
        let mut m = RunningMoments::new();
        for _ in 0..trials {
            let (_, out) = execute(&protocol, &inputs, &mut r).unwrap();
            m.push(out);
        }
        let ci = 3.0 * m.std_error_of_mean();
        assert!(
            (m.mean() - true_sum as f64).abs() < ci,
            "mean {} vs {true_sum}",
            m.mean()
        );
    }

    #[test]
    fn planner_matches_direct_evaluation() {
        let params = plan_single(1.0, 1e-8, 100_000, 10).unwrap();
        // max(140 ln(2e8)/99999, 270/99999), frozen from direct evaluation.
        assert!((params.gamma - 0.02675962669058414).abs() < 1e-15);

        // First term dominating and above 1: infeasible.
        let err = plan_single(0.5, 1e-8, 10_000, 22).unwrap_err();
        assert!(err.is_infeasible());

        assert!(plan_single(1.2, 1e-8, 100, 5).is_err());
    }

    #[test]
    fn planner_monotone() {
        let g = |n, eps: f64, p| required_gamma(eps, 1e-8, n, p);
        assert!(g(1_000_000, 1.0, 10) < g(100_000, 1.0, 10));
        assert!(g(100_000, 1.0, 10) <= g(100_000, 0.5, 10));
        assert!(g(100_000, 1.0, 20) >= g(100_000, 1.0, 10));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(mse_bound_single_raw(0.0, 10, 100), 0.0);
        let b = mse_bound_single_raw(0.1, 10, 100);
        assert!((b - 326.85185185185185).abs() < 1e-9, "b={b}");
        assert_eq!(mse_bound_single_raw(1.0, 10, 100), f64::INFINITY);
    }

    /// Monte Carlo estimate of the protocol MSE at a constant input.
    fn empirical_mse(params: &SingleParams, xbar: u64, trials: usize, r: &mut RngStream) -> RunningMoments {
        let protocol = SingleMessageProtocol {
            params: params.clone(),
        };
        let inputs = vec![xbar; params.n as usize];
        let true_sum = (xbar * params.n) as f64;
        let mut m = RunningMoments::new();
        for _ in 0..trials {
            let (_, out) = execute(&protocol, &inputs, r).unwrap();
            m.push((out - true_sum).powi(2));
        }
        m
    }

    #[test]
    fn interior_inputs_stay_within_closed_form_bound() {
        let mut r = rng(4);
        let params = SingleParams::new(0.1, 10, 100).unwrap();
        let bound = mse_bound_single(&params);
        let m = empirical_mse(&params, 5, 10_000, &mut r);
        assert!(
            m.mean() <= bound + 3.0 * m.std_error_of_mean(),
            "mse {} vs bound {bound}",
            m.mean()
        );
    }

    #[test]
    fn extreme_inputs_exceed_closed_form_but_match_exact_worst_case() {
        // The decoy spans p+1 points while the closed-form bound's algebra
        // assumes a p-point span, so at xbar = p the true error exceeds the
        // closed form and instead matches the exact expression.
        let mut r = rng(5);
        let params = SingleParams::new(0.1, 10, 100).unwrap();
        let closed_form = mse_bound_single(&params);
        let exact = mse_worst_case_single(0.1, 10, 100);
        assert!((exact - 401.2345679012346).abs() < 1e-9);

        let m = empirical_mse(&params, 10, 40_000, &mut r);
        let ci = 3.0 * m.std_error_of_mean();
        assert!(
            m.mean() > closed_form + ci,
            "expected closed-form exceedance: mse={} bound={closed_form}",
            m.mean()
        );
        assert!(
            (m.mean() - exact).abs() < ci,
            "mse {} vs exact {exact} (ci {ci})",
            m.mean()
        );
    }

    #[test]
    fn exact_worst_case_dominates_grid() {
        // The exact expression upper-bounds the empirical MSE everywhere on
        // a small (gamma, p, xbar) grid.
        let mut r = rng(6);
        for &gamma in &[0.05, 0.3] {
            for &p in &[2u64, 10] {
                for &xbar in &[0u64, 1, p / 2, p] {
                    let params = SingleParams::new(gamma, p, 60).unwrap();
                    let m = empirical_mse(&params, xbar, 4_000, &mut r);
                    let exact = mse_worst_case_single(gamma, p, 60);
                    assert!(
                        m.mean() <= exact + 3.0 * m.std_error_of_mean(),
                        "gamma={gamma} p={p} xbar={xbar}: {} > {exact}",
                        m.mean()
                    );
                }
            }
        }
    }
}
