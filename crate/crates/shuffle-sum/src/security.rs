//! Validation machinery for the secure-summation analysis.
//!
//! The message-count planner rests on a chain of three statements about the
//! split-and-shuffle protocol: (1) the expected total-variation distance
//! between views on equal-sum random inputs is at most
//! `sqrt(q^(mn-1) Pr[E] - 1)`, where `E` is the event that two independent
//! executions on the same random input produce identical views; (2) `Pr[E]`
//! is at most `q^(C(G)-mn)` in expectation over a random multigraph `G`
//! built from the shufflers' permutations; and (3) `E[q^C(G)]` is at most
//! `q + q^2 (n/e)^(1-m)` once `n >= 19`, `m >= 3` and
//! `q <= (n/e)^(m-1)/2`. This module checks (3) by Monte Carlo and exact
//! enumeration over permutation tuples, and checks (1) exactly on tiny
//! instances by exhaustive enumeration with rational arithmetic.

use std::collections::HashMap;

use num::rational::BigRational;
use num::{BigInt, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sampling::RngStream;
use crate::shuffle::shuffle;
use crate::stats::RunningMoments;

/// An `n`-vertex multigraph generated by `m` permutations: one edge
/// `(v, perm(v))` per vertex per permutation; self-loops allowed, every
/// vertex has degree `2m` counting multiplicity.
#[derive(Debug, Clone)]
pub struct PermutationMultigraph {
    n: usize,
    perms: Vec<Vec<usize>>,
}

impl PermutationMultigraph {
    /// Builds the graph from explicit permutations (each a bijection on
    /// `0..n`).
    pub fn from_permutations(n: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        for p in &perms {
            if p.len() != n {
                return Err(Error::InvalidParameter(
                    "permutation length must equal the vertex count".into(),
                ));
            }
            let mut seen = vec![false; n];
            for &v in p {
                if v >= n || seen[v] {
                    return Err(Error::InvalidParameter("not a permutation".into()));
                }
                seen[v] = true;
            }
        }
        Ok(PermutationMultigraph { n, perms })
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn permutations(&self) -> usize {
        self.perms.len()
    }

    /// The edge multiset `{(v, perm_i(v))}`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.n * self.perms.len());
        for p in &self.perms {
            for v in 0..self.n {
                edges.push((v, p[v]));
            }
        }
        edges
    }

    /// Degree of `v` counting multiplicity; self-loops count twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges()
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }
}

/// Draws a graph from the unconditioned permutation model: `m` independent
/// uniform permutations of `0..n`.
pub fn sample_multigraph(n: usize, m: usize, rng: &mut RngStream) -> Result<PermutationMultigraph> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and m >= 1".into()));
    }
    let mut perms = Vec::with_capacity(m);
    for _ in 0..m {
        let mut p: Vec<usize> = (0..n).collect();
        shuffle(&mut p, rng);
        perms.push(p);
    }
    Ok(PermutationMultigraph { n, perms })
}

/// Number of connected components, by union-find.
pub fn connected_components(g: &PermutationMultigraph) -> usize {
    let mut uf = UnionFind::new(g.n);
    for p in &g.perms {
        for v in 0..g.n {
            uf.union(v, p[v]);
        }
    }
    uf.count()
}

struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            components: n,
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }

    fn count(&self) -> usize {
        self.components
    }
}

/// A Monte Carlo estimate with a normal-approximation confidence half-width
/// (one standard error of the mean).
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub trials: u64,
}

/// Component count of one fresh multigraph draw.
pub fn sample_component_count(n: usize, m: usize, rng: &mut RngStream) -> Result<usize> {
    Ok(connected_components(&sample_multigraph(n, m, rng)?))
}

/// Monte Carlo mean of `q^C(G)` over `trials` graph draws.
pub fn estimate_q_power_components(
    n: usize,
    m: usize,
    q: f64,
    trials: u64,
    rng: &mut RngStream,
) -> Result<MonteCarloEstimate> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(
            "need at least 1000 trials for a meaningful CI".into(),
        ));
    }
    let mut moments = RunningMoments::new();
    for _ in 0..trials {
        let c = sample_component_count(n, m, rng)?;
        moments.push(q.powi(c as i32));
    }
    Ok(MonteCarloEstimate {
        estimate: moments.mean(),
        ci_halfwidth: moments.std_error_of_mean(),
        trials,
    })
}

/// Exact `E[q^C(G)]` by enumerating all `(n!)^m` permutation tuples.
/// Desk-scale only; errs above two million tuples.
pub fn exact_q_power_components(n: usize, m: usize, q: f64) -> Result<f64> {
    let fact = (1..=n as u64).product::<u64>();
    let tuples = (fact as f64).powi(m as i32);
    if tuples > 2e6 {
        return Err(Error::ResourceLimit(format!(
            "(n!)^m = {tuples:.0} permutation tuples exceed the enumeration limit"
        )));
    }
    let perms = all_permutations(n);
    let mut indices = vec![0usize; m];
    let mut total = 0.0f64;
    let mut count = 0u64;
    loop {
        let chosen: Vec<Vec<usize>> = indices.iter().map(|&i| perms[i].clone()).collect();
        let g = PermutationMultigraph::from_permutations(n, chosen)?;
        total += q.powi(connected_components(&g) as i32);
        count += 1;
        // Odometer over the m permutation slots.
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(total / count as f64);
            }
            indices[pos] += 1;
            if indices[pos] < perms.len() {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    heap_permutations(&mut current, n, &mut out);
    out
}

fn heap_permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permutations(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Closed-form bound `q + q^2 (n/e)^(1-m)` on `E[q^C(G)]`, valid for
/// `n >= 19`, `m >= 3` and `q <= (n/e)^(m-1)/2`.
pub fn component_bound(n: u64, m: u32, q: f64) -> Result<f64> {
    if n < 19 || m < 3 {
        return Err(Error::InvalidParameter(format!(
            "bound hypotheses need n >= 19 and m >= 3, got n={n}, m={m}"
        )));
    }
    let ratio = n as f64 / std::f64::consts::E;
    let q_max = 0.5 * ratio.powi(m as i32 - 1);
    if !(q >= 1.0 && q <= q_max) {
        return Err(Error::InvalidParameter(format!(
            "bound hypotheses need 1 <= q <= {q_max:.3}, got {q}"
        )));
    }
    Ok(q + q * q * ratio.powi(1 - m as i32))
}

/// Largest group order admitted by the bound hypotheses at `(n, m)`.
pub fn max_admissible_q(n: u64, m: u32) -> f64 {
    (0.5 * (n as f64 / std::f64::consts::E).powi(m as i32 - 1)).floor()
}

/// Average-case security parameter
/// `sigma = ((m-1)(log2 n - log2 e) - log2 q)/2` of the `m`-shuffler
/// protocol; the guarantee is meaningful when the result is at least 1.
pub fn avg_security_sigma(n: u64, m_shuffled: u32, log2_q: f64) -> Result<f64> {
    if n < 19 || m_shuffled < 3 {
        return Err(Error::InvalidParameter(format!(
            "security statement needs n >= 19 and m >= 3, got n={n}, m={m_shuffled}"
        )));
    }
    let gap = (n as f64).log2() - std::f64::consts::E.log2();
    Ok(((m_shuffled as f64 - 1.0) * gap - log2_q) / 2.0)
}

/// An exhaustively enumerable protocol instance: `n` users, `m` shuffled
/// shares over `Z_q`.
#[derive(Debug, Clone, Copy)]
pub struct TinyInstance {
    pub n: usize,
    pub m: usize,
    pub q: u64,
}

impl TinyInstance {
    pub fn new(n: usize, m: usize, q: u64) -> Result<Self> {
        if n < 1 || m < 1 || q < 2 {
            return Err(Error::InvalidParameter("need n, m >= 1 and q >= 2".into()));
        }
        if n > 4 || m > 3 || q > 4 {
            return Err(Error::ResourceLimit(format!(
                "tiny instances are capped at n <= 4, m <= 3, q <= 4; got ({n}, {m}, {q})"
            )));
        }
        let bits = (n * m) as f64 * (q as f64).log2();
        if bits > 24.0 + 1e-9 {
            return Err(Error::ResourceLimit(format!(
                "view space of {bits:.1} bits exceeds the 24-bit enumeration limit"
            )));
        }
        let fact = (1..=n as u64).product::<u64>() as f64;
        if fact.powi(m as i32) > 2e6 {
            return Err(Error::ResourceLimit(
                "(n!)^m exceeds the enumeration limit".into(),
            ));
        }
        Ok(TinyInstance { n, m, q })
    }
}

/// Everything the exact oracle establishes about one tiny instance. The
/// `*_holds` flags come from exact rational comparisons; the floating-point
/// fields are for reporting.
#[derive(Debug, Clone)]
pub struct TvOracleReport {
    pub n: usize,
    pub m: usize,
    pub q: u64,
    /// Expected TV between views over uniform equal-sum input pairs.
    pub avg_tv: f64,
    /// Maximum TV over all equal-sum input pairs.
    pub worst_tv: f64,
    /// Maximum TV of the variant with one extra unshuffled share.
    pub variant_worst_tv: f64,
    /// Exact probability that two independent executions on the same
    /// uniform input produce identical (ordered) views.
    pub collision_probability: f64,
    /// `sqrt(q^(mn-1) Pr[E] - 1)`.
    pub tv_bound: f64,
    /// avg_tv <= tv_bound, exactly.
    pub avg_within_bound: bool,
    /// variant_worst_tv <= avg_tv, exactly.
    pub variant_within_avg: bool,
    /// variant_worst_tv <= tv_bound, exactly.
    pub variant_within_bound: bool,
}

/// Exhaustive total-variation oracle.
///
/// For every input tuple in `Z_q^n` the oracle enumerates all share
/// assignments, canonicalizes views (shuffled slots as sorted multisets,
/// which is exactly what shuffling releases), and tabulates the view
/// distribution with integer counts. From those tables it computes, all in
/// exact rational arithmetic: the average TV over uniform equal-sum input
/// pairs, the worst-case TV, the worst-case TV of the randomized-input
/// variant (one extra unshuffled share per user, enumerated directly), and
/// the ordered-view collision probability `Pr[E]`, whose multiset-level
/// count is corrected by the number of ways each multiset arranges.
pub fn exact_tv_oracle(instance: TinyInstance) -> Result<TvOracleReport> {
    let TinyInstance { n, m, q } = instance;
    let qi = q as usize;

    let inputs = enumerate_tuples(n, qi);
    let base: Vec<HashMap<u64, u64>> = inputs
        .iter()
        .map(|x| view_distribution(x, n, m, qi, false))
        .collect();
    let variant: Vec<HashMap<u64, u64>> = inputs
        .iter()
        .map(|x| view_distribution(x, n, m, qi, true))
        .collect();

    // Group input indices by their sum.
    let mut by_sum: Vec<Vec<usize>> = vec![Vec::new(); qi];
    for (i, x) in inputs.iter().enumerate() {
        let s = x.iter().map(|&v| v as usize).sum::<usize>() % qi;
        by_sum[s].push(i);
    }

    let d_base = big_pow(q, (m - 1) * n);
    let d_variant = big_pow(q, m * n);

    // Average and worst TV over equal-sum pairs, base protocol.
    let mut avg_numerator = BigInt::zero();
    let mut worst_numerator = 0u64;
    for class in &by_sum {
        for &a in class {
            for &b in class {
                let tv = tv_count(&base[a], &base[b]);
                avg_numerator += tv;
                worst_numerator = worst_numerator.max(tv);
            }
        }
    }
    // Pairs are weighted 1/(q^n * q^(n-1)).
    let pair_count = big_pow(q, 2 * n - 1);
    let avg_tv = BigRational::new(avg_numerator, 2 * &d_base * &pair_count);
    let worst_tv = BigRational::new(worst_numerator.into(), 2 * &d_base);

    // Worst TV over equal-sum pairs for the unshuffled-share variant.
    let mut variant_worst_numerator = 0u64;
    for class in &by_sum {
        for &a in class {
            for &b in class {
                variant_worst_numerator = variant_worst_numerator.max(tv_count(&variant[a], &variant[b]));
            }
        }
    }
    let variant_worst_tv = BigRational::new(variant_worst_numerator.into(), 2 * &d_variant);

    // Ordered-view collision probability: multiset counts weighted by the
    // number of arrangements each multiset admits per column,
    //   Pr[E | x] = sum_mu P[mu]^2 * prod_j mult(mu_j) / n!.
    let n_fact: u64 = (1..=n as u64).product();
    let mut collision_numerator = BigInt::zero();
    for table in &base {
        for (&key, &count) in table {
            let mult = arrangement_multiplicity(key, n, m, qi);
            collision_numerator += BigInt::from(count) * BigInt::from(count) * BigInt::from(mult);
        }
    }
    let collision_denominator =
        big_pow(q, n) * &d_base * &d_base * BigInt::from(n_fact).pow(m as u32);
    let collision = BigRational::new(collision_numerator, collision_denominator);

    // Bound: sqrt(q^(mn-1) Pr[E] - 1); compare squares exactly.
    let bound_sq = BigRational::from(big_pow(q, m * n - 1)) * &collision
        - BigRational::from(BigInt::from(1));
    let avg_within_bound = &avg_tv * &avg_tv <= bound_sq;
    let variant_within_avg = variant_worst_tv <= avg_tv;
    let variant_within_bound = &variant_worst_tv * &variant_worst_tv <= bound_sq;

    Ok(TvOracleReport {
        n,
        m,
        q,
        avg_tv: ratio_to_f64(&avg_tv),
        worst_tv: ratio_to_f64(&worst_tv),
        variant_worst_tv: ratio_to_f64(&variant_worst_tv),
        collision_probability: ratio_to_f64(&collision),
        tv_bound: ratio_to_f64(&bound_sq).max(0.0).sqrt(),
        avg_within_bound,
        variant_within_avg,
        variant_within_bound,
    })
}

/// Exact TV between the base-protocol views of two specific input tuples.
pub fn exact_pair_tv(instance: TinyInstance, x: &[u8], x_prime: &[u8]) -> Result<f64> {
    let TinyInstance { n, m, q } = instance;
    if x.len() != n || x_prime.len() != n {
        return Err(Error::InvalidParameter("input length must be n".into()));
    }
    if x.iter().chain(x_prime).any(|&v| v as u64 >= q) {
        return Err(Error::InvalidParameter("inputs must lie in Z_q".into()));
    }
    let a = view_distribution(x, n, m, q as usize, false);
    let b = view_distribution(x_prime, n, m, q as usize, false);
    let tv = BigRational::new(tv_count(&a, &b).into(), BigInt::from(2) * big_pow(q, (m - 1) * n));
    Ok(ratio_to_f64(&tv))
}

fn big_pow(base: u64, exp: usize) -> BigInt {
    BigInt::from(base).pow(exp as u32)
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn enumerate_tuples(n: usize, q: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(q.pow(n as u32));
    let mut current = vec![0u8; n];
    loop {
        out.push(current.clone());
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            current[pos] += 1;
            if (current[pos] as usize) < q {
                break;
            }
            current[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact view distribution for one input tuple as integer counts over the
/// canonical view space. Base protocol: `m` shuffled shares per user, the
/// last determined by the user's value (denominator `q^((m-1)n)`).
/// Variant: `m` shuffled shares drawn freely plus one unshuffled share
/// making up the difference (denominator `q^(mn)`); the unshuffled column
/// stays in user order inside the key.
fn view_distribution(
    x: &[u8],
    n: usize,
    m: usize,
    q: usize,
    unshuffled_extra: bool,
) -> HashMap<u64, u64> {
    let free = if unshuffled_extra { m } else { m - 1 };
    let per_user = q.pow(free as u32);
    let total_columns = if unshuffled_extra { m + 1 } else { m };

    // Share tuples per input value: free digits plus the determined one.
    let mut shares_for_value: Vec<Vec<Vec<u8>>> = Vec::with_capacity(q);
    for v in 0..q {
        let mut options = Vec::with_capacity(per_user);
        let mut digits = vec![0u8; free];
        loop {
            let mut tuple = Vec::with_capacity(free + 1);
            let mut sum = 0usize;
            for &d in &digits {
                tuple.push(d);
                sum += d as usize;
            }
            // The determined share goes last: the final shuffled column in
            // the base protocol, the unshuffled column in the variant.
            let last = (v + q * free - (sum % q)) % q;
            tuple.push(last as u8);
            options.push(tuple);
            let mut pos = 0;
            loop {
                if pos == free {
                    break;
                }
                digits[pos] += 1;
                if (digits[pos] as usize) < q {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if digits.iter().all(|&d| d == 0) {
                break;
            }
        }
        debug_assert_eq!(options.len(), per_user);
        shares_for_value.push(options);
    }

    let mut table = HashMap::new();
    let mut choice = vec![0usize; n];
    let mut columns = vec![vec![0u8; n]; total_columns];
    loop {
        for (i, &xi) in x.iter().enumerate() {
            let tuple = &shares_for_value[xi as usize][choice[i]];
            for (j, &s) in tuple.iter().enumerate() {
                columns[j][i] = s;
            }
        }
        // Canonicalize: sort the m shuffled columns, keep the unshuffled
        // column (when present) in user order.
        let mut key = 0u64;
        for (j, col) in columns.iter().enumerate() {
            let mut c = col.clone();
            if j < m {
                c.sort_unstable();
            }
            for &d in &c {
                key = key * q as u64 + d as u64;
            }
        }
        *table.entry(key).or_insert(0) += 1;

        let mut pos = 0;
        loop {
            if pos == n {
                return table;
            }
            choice[pos] += 1;
            if choice[pos] < per_user {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// `sum_keys |a - b|`, the unnormalized total-variation numerator.
fn tv_count(a: &HashMap<u64, u64>, b: &HashMap<u64, u64>) -> u64 {
    let mut total = 0u64;
    for (key, &ca) in a {
        let cb = b.get(key).copied().unwrap_or(0);
        total += ca.abs_diff(cb);
    }
    for (key, &cb) in b {
        if !a.contains_key(key) {
            total += cb;
        }
    }
    total
}

/// Product over columns of the per-column arrangement multiplicities
/// `prod_values count!` — how many of the `n!` orderings collapse onto the
/// same ordered tuple.
fn arrangement_multiplicity(key: u64, n: usize, m: usize, q: usize) -> u64 {
    let mut digits = vec![0u8; n * m];
    let mut k = key;
    for slot in (0..n * m).rev() {
        digits[slot] = (k % q as u64) as u8;
        k /= q as u64;
    }
    let mut mult = 1u64;
    for j in 0..m {
        let mut counts = vec![0u64; q];
        for i in 0..n {
            counts[digits[j * n + i] as usize] += 1;
        }
        for c in counts {
            mult *= (1..=c).product::<u64>().max(1);
        }
    }
    mult
}
