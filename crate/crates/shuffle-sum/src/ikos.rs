//! Constant-error summation from secure aggregation: additive secret
//! sharing over `Z_q` plus distributed discrete-Laplace noise.
//!
//! Each user discretizes their input to precision `p`, adds the difference
//! of two Pólya(1/n, alpha) draws (so the *sum* of all users' noise is one
//! discrete Laplace draw), reduces mod `q`, and splits the result into
//! additive shares sent through parallel shufflers. The analyzer adds
//! everything mod `q`, corrects a possible wrap-around, and rescales. With
//! the planned `p = ceil(sqrt(n))`, `q = 2np` and `alpha = exp(-eps/p)` the
//! protocol matches the error of a central discrete-Laplace mechanism up to
//! discretization.
//!
//! Three message-count planners are provided: the sharp count
//! [`messages_improved`] derived from the average-case security analysis
//! (one share may bypass the shufflers), the fixed-point count
//! [`messages_original`] from the earlier hashing-based analysis, and the
//! comparison count [`messages_ghazi`].

use crate::error::{Error, Result};
use crate::sampling::{randomized_round, sample_polya, uniform_int, RngStream};
use crate::shuffle::{GroupElement, ShuffleProtocol, View};

/// Parameters of one split-and-shuffle protocol instance.
#[derive(Debug, Clone)]
pub struct IkosParams {
    pub n: u64,
    /// Fixed-point precision; inputs discretize to `{0, ..., p}`.
    pub p: u64,
    /// Group order; must exceed `n * p` so the noiseless sum never wraps.
    pub q: u64,
    /// Pólya noise parameter `exp(-eps/p)` when planned.
    pub alpha: f64,
    /// Total shares per user, including the unshuffled one when flagged.
    pub m_total: u32,
    /// Statistical security parameter the message count was sized for.
    pub sigma: f64,
    /// When set, the last share bypasses the shufflers.
    pub unshuffled_last_share: bool,
}

impl IkosParams {
    pub fn new(n: u64, p: u64, q: u64, alpha: f64, m_total: u32) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter("need n >= 1 and p >= 1".into()));
        }
        if q <= n.saturating_mul(p) {
            return Err(Error::InvalidParameter(format!(
                "group order {q} must exceed n*p = {}",
                n * p
            )));
        }
        if q >= 1 << 63 {
            return Err(Error::InvalidParameter(
                "executable protocols require q < 2^63".into(),
            ));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "noise parameter must be in [0,1), got {alpha}"
            )));
        }
        if m_total < 1 {
            return Err(Error::InvalidParameter("need at least one share".into()));
        }
        Ok(IkosParams {
            n,
            p,
            q,
            alpha,
            m_total,
            sigma: f64::NAN,
            unshuffled_last_share: false,
        })
    }
}

/// Splits `x` into `m` additive shares over its group: `m - 1` uniform
/// draws plus the difference, so any `m - 1` shares are jointly uniform.
pub fn split_shares(x: GroupElement, m: u32, rng: &mut RngStream) -> Result<Vec<GroupElement>> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one share".into()));
    }
    let q = x.modulus();
    let mut shares = Vec::with_capacity(m as usize);
    let mut rest = x;
    for _ in 0..m - 1 {
        let share = GroupElement::new(uniform_int(0, q as i64 - 1, rng)? as u64, q)?;
        rest = rest.sub(&share);
        shares.push(share);
    }
    shares.push(rest);
    Ok(shares)
}

/// Algorithm front half: discretize `x`, add the Pólya noise difference,
/// reduce mod `q`. This is the value whose shares the user submits.
pub fn encode_noisy(x: f64, params: &IkosParams, rng: &mut RngStream) -> Result<GroupElement> {
    let rounded = randomized_round(x, params.p, rng)?;
    let shape = 1.0 / params.n as f64;
    let noise = if params.alpha == 0.0 {
        0i64
    } else {
        sample_polya(shape, params.alpha, rng)? as i64
            - sample_polya(shape, params.alpha, rng)? as i64
    };
    GroupElement::from_signed(rounded.value as i64 + noise, params.q)
}

/// Local randomizer: encode, then split into `m_total` additive shares.
pub fn ikos_randomize(
    x: f64,
    params: &IkosParams,
    rng: &mut RngStream,
) -> Result<Vec<GroupElement>> {
    let y = encode_noisy(x, params, rng)?;
    split_shares(y, params.m_total, rng)
}

/// Analyzer: add every share mod `q`, shift sums past `(np + q)/2` down by
/// `q` (they are wrapped negatives), and rescale by the precision.
pub fn ikos_analyze(view: &View<GroupElement>, params: &IkosParams) -> Result<f64> {
    let expected = params.n * params.m_total as u64;
    let count: usize = view.columns().iter().map(Vec::len).sum();
    if count as u64 != expected {
        return Err(Error::Protocol(format!(
            "analyzer expected {expected} shares, got {count}"
        )));
    }
    let mut sum = GroupElement::new(0, params.q)?;
    for column in view.columns() {
        for share in column {
            if share.modulus() != params.q || share.value() >= params.q {
                return Err(Error::Protocol("share outside the group".into()));
            }
            sum = sum.add(share);
        }
    }
    ikos_decode(sum.value(), params)
}

/// The wrap correction and rescaling on the modular total.
pub fn ikos_decode(z: u64, params: &IkosParams) -> Result<f64> {
    if z >= params.q {
        return Err(Error::Protocol(format!("total {z} outside [0, {})", params.q)));
    }
    let np = params.n as u128 * params.p as u128;
    // z > (np + q)/2, kept exact: strict inequality, no correction at the
    // midpoint itself.
    let corrected = if 2 * z as u128 > np + params.q as u128 {
        z as f64 - params.q as f64
    } else {
        z as f64
    };
    Ok(corrected / params.p as f64)
}

/// Security parameter needed so the protocol's total-variation slack makes
/// an `eps`-DP core `(eps, delta)`-DP: `sigma = log2((1 + e^eps)/delta)`.
pub fn sigma_from_delta(epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need eps > 0 and delta in (0,1), got ({epsilon}, {delta})"
        )));
    }
    Ok(((1.0 + epsilon.exp()) / delta).log2())
}

/// Message counts produced by a planner: the total per user and how many of
/// them pass through shufflers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageBudget {
    pub total: u32,
    pub shuffled: u32,
}

/// Sharp message count from the average-case security analysis:
/// `total = ceil((2 sigma + log2 q) / (log2 n - log2 e) + 2)`, one of which
/// may be sent outside the shuffle (`shuffled = total - 1`).
///
/// Requires `n >= 19` and at least 3 shuffled messages.
pub fn messages_improved(sigma: f64, log2_q: f64, n: u64) -> Result<MessageBudget> {
    if n < 19 {
        return Err(Error::InvalidParameter(format!(
            "the sharp analysis requires n >= 19, got {n}"
        )));
    }
    if !(sigma > 0.0) || !(log2_q > 0.0) {
        return Err(Error::InvalidParameter(
            "need sigma > 0 and log2(q) > 0".into(),
        ));
    }
    let denom = (n as f64).log2() - std::f64::consts::E.log2();
    let total = ((2.0 * sigma + log2_q) / denom + 2.0).ceil();
    let total = total as u32;
    if total < 4 {
        return Err(Error::InvalidParameter(format!(
            "sharp analysis needs at least 3 shuffled messages, got {}",
            total.saturating_sub(1)
        )));
    }
    Ok(MessageBudget {
        total,
        shuffled: total - 1,
    })
}

/// Message count from the hashing-based analysis: solves the fixed point
/// `m = 1 + sigma + 5 ceil(log2 q)/2 + log2(pi (m + 1/2))/4` by iteration,
/// adds `log2(n-1)` to the root, and takes the ceiling. Base-2 logs
/// throughout, consistent with sigma counting bits.
pub fn messages_original(sigma: f64, log2_q: f64, n: u64) -> Result<u32> {
    if n < 2 || !(sigma > 0.0) || !(log2_q >= 1.0) {
        return Err(Error::InvalidParameter(
            "need n >= 2, sigma > 0 and q >= 2".into(),
        ));
    }
    let base = 1.0 + sigma + 2.5 * log2_q.ceil();
    let mut root = base;
    for _ in 0..50 {
        root = base + 0.25 * (std::f64::consts::PI * (root + 0.5)).log2();
    }
    Ok((root + ((n - 1) as f64).log2()).ceil() as u32)
}

/// The comparison count `ceil(100 (sigma + log2 q)/(log2 n - 1) + 4)`.
pub fn messages_ghazi(sigma: f64, log2_q: f64, n: u64) -> Result<u32> {
    if n <= 2 {
        return Err(Error::InvalidParameter("need n > 2".into()));
    }
    if sigma < 0.0 || log2_q < 0.0 {
        return Err(Error::InvalidParameter("need sigma, log2(q) >= 0".into()));
    }
    let denom = (n as f64).log2() - 1.0;
    Ok((100.0 * (sigma + log2_q) / denom + 4.0).ceil() as u32)
}

/// Full planner: `p = ceil(sqrt(n))`, `q = 2np` (which makes `q > np` exact
/// after integer rounding), `alpha = exp(-eps/p)`, sigma from the budget and
/// the sharp message count with the last share unshuffled.
pub fn plan_ikos(epsilon: f64, delta: f64, n: u64) -> Result<IkosParams> {
    if n < 19 {
        return Err(Error::InvalidParameter(format!(
            "planner requires n >= 19, got {n}"
        )));
    }
    let p = (n as f64).sqrt().ceil() as u64;
    let q = 2 * n * p;
    if q >= 1 << 63 {
        return Err(Error::InvalidParameter(
            "planned group order exceeds 2^63".into(),
        ));
    }
    let sigma = sigma_from_delta(epsilon, delta)?;
    let budget = messages_improved(sigma, (q as f64).log2(), n)?;
    let mut params = IkosParams::new(n, p, q, (-epsilon / p as f64).exp(), budget.total)?;
    params.sigma = sigma;
    params.unshuffled_last_share = true;
    Ok(params)
}

/// Three-term error bound with `alpha = exp(-eps/p)`: distributed-noise
/// variance `2a/(p^2 (1-a)^2)`, rounding `n/(4p^2)`, and the wrap-around
/// term `(q/p)^2 a^((q - np)/2)`.
pub fn mse_bound_ikos(epsilon: f64, n: u64, p: u64, q: u64) -> f64 {
    let alpha = (-epsilon / p as f64).exp();
    let pf = p as f64;
    let noise = 2.0 * alpha / (pf * pf * (1.0 - alpha).powi(2));
    let rounding = n as f64 / (4.0 * pf * pf);
    let overflow_exponent = (q as f64 - (n * p) as f64) / 2.0;
    let overflow = (q as f64 / pf).powi(2) * alpha.powf(overflow_exponent);
    noise + rounding + overflow
}

/// The protocol as a runnable shuffle protocol on `[0,1]` inputs.
#[derive(Debug, Clone)]
pub struct IkosProtocol {
    pub params: IkosParams,
}

impl ShuffleProtocol for IkosProtocol {
    type Input = f64;
    type Message = GroupElement;

    fn name(&self) -> &str {
        "ikos"
    }

    fn message_count(&self) -> usize {
        self.params.m_total as usize
    }

    fn unshuffled_column(&self) -> Option<usize> {
        self.params
            .unshuffled_last_share
            .then_some(self.params.m_total as usize - 1)
    }

    fn randomize(&self, input: &f64, rng: &mut RngStream) -> Result<Vec<GroupElement>> {
        ikos_randomize(*input, &self.params, rng)
    }

    fn analyze(&self, view: &View<GroupElement>) -> Result<f64> {
        ikos_analyze(view, &self.params)
    }
}
