//! Gentle measurement of one block of `l` copies.
//!
//! Counting how many copies project onto `|phi>` gives a binomial count `k`.
//! The gentle version only reveals which of `m` randomly placed bins holds
//! `k`. Outcome statistics are computed analytically from the binomial
//! distribution; [`circuit`] and [`collective`] hold brute-force backends that
//! check those statistics against explicit operators for small `l`.

pub mod circuit;
pub mod collective;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use circuit::{simulate_gentle_circuit, CircuitOutcome, GentleCircuit, SmallSimState};
pub use collective::{brute_force_collective, collective_operators};

/// Sorted count-space boundaries `0 = b_0 <= b_1 <= ... <= b_m = l + 1`.
///
/// Bin `j` (1-based) holds the counts `b_{j-1} <= k < b_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinPartition {
    block_length: u64,
    boundaries: Vec<u64>,
}

impl BinPartition {
    pub fn new(block_length: u64, boundaries: Vec<u64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidBins("need at least one bin".into()));
        }
        if boundaries[0] != 0 || *boundaries.last().unwrap() != block_length + 1 {
            return Err(Error::InvalidBins(format!(
                "endpoints must be 0 and {}, got {:?}",
                block_length + 1,
                (boundaries[0], boundaries.last())
            )));
        }
        if boundaries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidBins("boundaries must be nondecreasing".into()));
        }
        Ok(Self { block_length, boundaries })
    }

    /// The single bin `[0, l + 1)`.
    pub fn single(block_length: u64) -> Self {
        Self { block_length, boundaries: vec![0, block_length + 1] }
    }

    pub fn block_length(&self) -> u64 {
        self.block_length
    }

    pub fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }

    pub fn bin_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Boundaries other than the fixed endpoints.
    pub fn interior(&self) -> &[u64] {
        &self.boundaries[1..self.boundaries.len() - 1]
    }

    /// Half-open count interval `[lo, hi)` of bin `j` (1-based).
    pub fn interval(&self, j: usize) -> Result<(u64, u64)> {
        if j == 0 || j > self.bin_count() {
            return Err(Error::InvalidBins(format!("bin index {j} outside 1..={}", self.bin_count())));
        }
        Ok((self.boundaries[j - 1], self.boundaries[j]))
    }

    /// 1-based index of the bin holding count `k`.
    pub fn bin_of(&self, k: u64) -> usize {
        // Last boundary <= k among the first m; duplicates resolve to the non-empty bin.
        self.boundaries[..self.boundaries.len() - 1].partition_point(|&b| b <= k)
    }
}

/// Draws `m - 1` interior boundaries i.i.d. uniform on `{0..l}` and sorts them.
pub fn draw_bins<R: Rng + ?Sized>(l: u64, m: usize, rng: &mut R) -> Result<BinPartition> {
    if m < 1 || m as u64 > l.max(1) {
        return Err(Error::InvalidBins(format!("bin count {m} must lie in 1..={l}")));
    }
    let mut boundaries = Vec::with_capacity(m + 1);
    boundaries.push(0);
    boundaries.extend((1..m).map(|_| rng.random_range(0..=l)));
    boundaries[1..].sort_unstable();
    boundaries.push(l + 1);
    Ok(BinPartition { block_length: l, boundaries })
}

/// Binomial law of the count `k` of `|phi>` outcomes among `l` copies.
///
/// Keeps prefix sums from both ends so that both bin probabilities and the
/// (often tiny) mass outside a bin are accurate.
#[derive(Clone, Debug)]
pub struct CountDistribution {
    alpha: f64,
    pmf: Vec<f64>,
    /// `below[k] = P(K < k)` for `k = 0..=l+1`.
    below: Vec<f64>,
    /// `at_least[k] = P(K >= k)` for `k = 0..=l+1`.
    at_least: Vec<f64>,
}

impl CountDistribution {
    pub fn new(alpha: f64, l: u64) -> Result<Self> {
        let pmf = count_pmf(alpha, l)?;
        let n = pmf.len();
        let mut below = vec![0.0; n + 1];
        for k in 0..n {
            below[k + 1] = below[k] + pmf[k];
        }
        let mut at_least = vec![0.0; n + 1];
        for k in (0..n).rev() {
            at_least[k] = at_least[k + 1] + pmf[k];
        }
        Ok(Self { alpha, pmf, below, at_least })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn block_length(&self) -> u64 {
        (self.pmf.len() - 1) as u64
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    fn clamp(&self, k: u64) -> usize {
        (k as usize).min(self.pmf.len())
    }

    /// `P(lo <= K < hi)`.
    pub fn interval_probability(&self, lo: u64, hi: u64) -> f64 {
        let (lo, hi) = (self.clamp(lo), self.clamp(hi));
        if hi <= lo {
            return 0.0;
        }
        // Sum from whichever side carries less mass.
        if self.below[lo] + self.at_least[hi] < 0.5 {
            (1.0 - self.below[lo] - self.at_least[hi]).max(0.0)
        } else {
            (self.below[hi] - self.below[lo]).max(0.0)
        }
    }

    /// `P(K < lo) + P(K >= hi)`.
    pub fn outside_probability(&self, lo: u64, hi: u64) -> f64 {
        let (lo, hi) = (self.clamp(lo), self.clamp(hi));
        if hi <= lo {
            return 1.0;
        }
        if self.below[lo] + self.at_least[hi] < 0.5 {
            self.below[lo] + self.at_least[hi]
        } else {
            (1.0 - (self.below[hi] - self.below[lo])).max(0.0)
        }
    }

    /// Samples the bin index by inverse CDF over exact bin probabilities.
    pub fn sample_bin<R: Rng + ?Sized>(&self, bins: &BinPartition, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let m = bins.bin_count();
        let mut acc = 0.0;
        let mut last_nonempty = 1;
        for j in 1..=m {
            let (lo, hi) = bins.interval(j).expect("index in range");
            let p = self.interval_probability(lo, hi);
            if p > 0.0 {
                last_nonempty = j;
                acc += p;
                if u < acc {
                    return j;
                }
            }
        }
        last_nonempty
    }
}

/// `pmf(k) = C(l,k) alpha^k (1-alpha)^(l-k)` for `k = 0..=l`, evaluated in log space.
pub fn count_pmf(alpha: f64, l: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange { what: "alpha", value: alpha });
    }
    let n = l as usize;
    let mut pmf = vec![0.0; n + 1];
    if alpha == 0.0 {
        pmf[0] = 1.0;
        return Ok(pmf);
    }
    if alpha == 1.0 {
        pmf[n] = 1.0;
        return Ok(pmf);
    }
    let (la, lb) = (alpha.ln(), (-alpha).ln_1p());
    // Anchor the log-binomial recursion at the mode to keep it short-ranged.
    let mode = (((l + 1) as f64 * alpha).floor() as usize).min(n);
    let mut logs = vec![0.0; n + 1];
    logs[mode] = 0.0;
    for k in mode..n {
        logs[k + 1] = logs[k] + ((n - k) as f64).ln() - ((k + 1) as f64).ln() + la - lb;
    }
    for k in (1..=mode).rev() {
        logs[k - 1] = logs[k] + (k as f64).ln() - ((n - k + 1) as f64).ln() + lb - la;
    }
    let total: f64 = logs.iter().map(|x| x.exp()).sum();
    let log_total = total.ln();
    for (p, lg) in pmf.iter_mut().zip(&logs) {
        *p = (lg - log_total).exp();
    }
    Ok(pmf)
}

/// Probability of bin `j`: the pmf summed over `b_{j-1} <= k < b_j`.
pub fn bin_probability(pmf: &[f64], bins: &BinPartition, j: usize) -> Result<f64> {
    let (lo, hi) = bins.interval(j)?;
    let hi = (hi as usize).min(pmf.len());
    let lo = (lo as usize).min(hi);
    Ok(pmf[lo..hi].iter().sum())
}

/// Failure event of a block measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureClass {
    Success,
    /// An interior boundary sits within `sqrt(l) ln l` of `l alpha`.
    TooCloseBoundary,
    /// No interior boundary within `l^(1-s) ln l` on one side of `l alpha`.
    NoNearbyBoundary,
    /// The measured bin does not contain `l alpha`.
    WrongBin,
}

impl FailureClass {
    pub fn is_success(self) -> bool {
        self == FailureClass::Success
    }
}

/// `sqrt(l) ln l`, the class (i) hazard distance.
pub fn hazard_distance(l: u64) -> f64 {
    let lf = l as f64;
    lf.sqrt() * lf.ln()
}

/// `l^(1-s) ln l`, the class (ii) window.
pub fn boundary_window(l: u64, s: f64) -> f64 {
    let lf = l as f64;
    lf.powf(1.0 - s) * lf.ln()
}

/// Classifies a block outcome; the first triggered event wins in the order (i), (ii), (iii).
pub fn classify_failure(alpha: f64, bins: &BinPartition, j: usize, s: f64) -> FailureClass {
    let l = bins.block_length();
    let center = l as f64 * alpha;
    let interior = bins.interior();
    let hazard = hazard_distance(l);
    if interior.iter().any(|&b| (b as f64 - center).abs() < hazard) {
        return FailureClass::TooCloseBoundary;
    }
    if !interior.is_empty() {
        let window = boundary_window(l, s);
        let left = interior.iter().any(|&b| {
            let b = b as f64;
            b >= center - window && b <= center
        });
        let right = interior.iter().any(|&b| {
            let b = b as f64;
            b >= center && b <= center + window
        });
        if !(left && right) {
            return FailureClass::NoNearbyBoundary;
        }
    }
    match bins.interval(j) {
        Ok((lo, hi)) if (lo as f64) <= center && center < hi as f64 => FailureClass::Success,
        _ => FailureClass::WrongBin,
    }
}

/// `F_e = sqrt(<phi|pi|phi>)` for a projective outcome of probability `bin_prob`.
pub fn entanglement_fidelity(bin_prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&bin_prob) {
        return Err(Error::OutOfRange { what: "bin probability", value: bin_prob });
    }
    Ok(bin_prob.sqrt())
}

/// `1 - F_e` computed from the mass outside the bin without cancellation.
pub fn fidelity_deficit(miss_probability: f64) -> f64 {
    let q = miss_probability.clamp(0.0, 1.0);
    q / (1.0 + (1.0 - q).sqrt())
}

/// Block length, exponent `s`, and bin count for one gentle measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GentleConfig {
    pub block_length: u64,
    pub exponent_s: f64,
    pub bin_count: usize,
}

impl GentleConfig {
    /// `m = floor(l^s)`.
    pub fn new(block_length: u64, exponent_s: f64) -> Result<Self> {
        check_exponent(exponent_s)?;
        if block_length == 0 {
            return Err(Error::InvalidBins("block length must be positive".into()));
        }
        // The nudge keeps exact powers such as 10000^0.25 from flooring one short.
        let m = (((block_length as f64).powf(exponent_s) + 1e-9).floor() as usize).max(1);
        Ok(Self { block_length, exponent_s, bin_count: m })
    }

    pub fn with_bin_count(block_length: u64, exponent_s: f64, bin_count: usize) -> Result<Self> {
        let cfg = Self { block_length, exponent_s, bin_count };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.exponent_s)?;
        if self.block_length == 0 || self.bin_count < 1 || self.bin_count as u64 > self.block_length {
            return Err(Error::InvalidBins(format!(
                "bin count {} invalid for block length {}",
                self.bin_count, self.block_length
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_exponent(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::OutOfRange { what: "exponent s", value: s });
    }
    Ok(())
}

/// Result of gently measuring one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GentleOutcome {
    /// 1-based bin index.
    pub bin_index: usize,
    /// `[b_{j-1}, b_j)` in count units.
    pub bin_interval: (u64, u64),
    pub alpha_estimate: f64,
    pub bin_probability: f64,
    /// `1 - bin_probability`, computed directly from the tails.
    pub miss_probability: f64,
    pub failure_class: FailureClass,
}

impl GentleOutcome {
    pub fn fidelity(&self) -> f64 {
        self.bin_probability.sqrt()
    }

    pub fn fidelity_deficit(&self) -> f64 {
        fidelity_deficit(self.miss_probability)
    }
}

/// Runs one gentle block measurement against a precomputed count distribution.
pub fn measure_block<R: Rng + ?Sized>(
    dist: &CountDistribution,
    cfg: &GentleConfig,
    rng: &mut R,
) -> Result<GentleOutcome> {
    cfg.validate()?;
    if dist.block_length() != cfg.block_length {
        return Err(Error::DimensionMismatch {
            expected: cfg.block_length as usize,
            found: dist.block_length() as usize,
        });
    }
    let bins = draw_bins(cfg.block_length, cfg.bin_count, rng)?;
    Ok(measure_with_bins(dist, &bins, cfg.exponent_s, rng))
}

/// Measures against fixed bins.
pub fn measure_with_bins<R: Rng + ?Sized>(
    dist: &CountDistribution,
    bins: &BinPartition,
    s: f64,
    rng: &mut R,
) -> GentleOutcome {
    let l = bins.block_length();
    let j = dist.sample_bin(bins, rng);
    let (lo, hi) = bins.interval(j).expect("sampled index in range");
    let lf = l as f64;
    let alpha_estimate = ((lo + hi) as f64 / 2.0 / lf).clamp(0.0, 1.0);
    GentleOutcome {
        bin_index: j,
        bin_interval: (lo, hi),
        alpha_estimate,
        bin_probability: dist.interval_probability(lo, hi),
        miss_probability: dist.outside_probability(lo, hi),
        failure_class: classify_failure(dist.alpha(), bins, j, s),
    }
}

/// Draws bins, samples the outcome, and classifies it.
pub fn run_gentle_block<R: Rng + ?Sized>(alpha: f64, cfg: &GentleConfig, rng: &mut R) -> Result<GentleOutcome> {
    cfg.validate()?;
    let dist = CountDistribution::new(alpha, cfg.block_length)?;
    measure_block(&dist, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Binomial coefficient by exact integer multiplication.
    fn choose(n: u64, k: u64) -> f64 {
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as f64
    }

    #[test]
    fn single_bin_covers_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bins = draw_bins(50, 1, &mut rng).unwrap();
        assert_eq!(bins.boundaries(), &[0, 51]);
        for k in 0..=50 {
            assert_eq!(bins.bin_of(k), 1);
        }
        assert!(draw_bins(5, 6, &mut rng).is_err());
        assert!(draw_bins(5, 0, &mut rng).is_err());
    }

    #[test]
    fn draw_bins_is_deterministic() {
        let a = draw_bins(100, 10, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = draw_bins(100, 10, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bin_count(), 10);
        assert!(a.boundaries().windows(2).all(|w| w[0] <= w[1]));
        for k in 0..=100 {
            let j = a.bin_of(k);
            let (lo, hi) = a.interval(j).unwrap();
            assert!(lo <= k && k < hi);
        }
    }

    #[test]
    fn partition_rejects_bad_endpoints() {
        assert!(BinPartition::new(10, vec![0, 5, 11]).is_ok());
        assert!(BinPartition::new(10, vec![1, 5, 11]).is_err());
        assert!(BinPartition::new(10, vec![0, 5, 10]).is_err());
        assert!(BinPartition::new(10, vec![0, 6, 5, 11]).is_err());
        assert!(BinPartition::new(10, vec![0]).is_err());
    }

    #[test]
    fn pmf_examples() {
        let p = count_pmf(1.0, 7).unwrap();
        assert_eq!(p[7], 1.0);
        assert_eq!(p.iter().sum::<f64>(), 1.0);
        let p = count_pmf(0.5, 2).unwrap();
        for (got, want) in p.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(count_pmf(1.5, 3).is_err());
        assert!(count_pmf(-0.1, 3).is_err());
    }

    #[test]
    fn pmf_matches_exact_binomial() {
        for &(alpha, l) in &[(0.3, 20u64), (0.77, 40), (0.01, 60), (0.5, 61)] {
            let p = count_pmf(alpha, l).unwrap();
            for k in 0..=l {
                let want = choose(l, k) * alpha.powi(k as i32) * (1.0 - alpha).powi((l - k) as i32);
                assert!((p[k as usize] - want).abs() <= 1e-13 + 1e-10 * want, "alpha {alpha} l {l} k {k}");
            }
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let big = count_pmf(0.4, 1_000_000).unwrap();
        assert!((big.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bin_probability_examples() {
        let pmf = count_pmf(0.5, 2).unwrap();
        let single = BinPartition::single(2);
        assert!((bin_probability(&pmf, &single, 1).unwrap() - 1.0).abs() < 1e-15);
        let bins = BinPartition::new(2, vec![0, 2, 3]).unwrap();
        assert!((bin_probability(&pmf, &bins, 1).unwrap() - 0.75).abs() < 1e-15);
        assert!((bin_probability(&pmf, &bins, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!(bin_probability(&pmf, &bins, 3).is_err());
        assert!(bin_probability(&pmf, &bins, 0).is_err());
    }

    #[test]
    fn bin_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let l = rng.random_range(1..500u64);
            let m = rng.random_range(1..=l.min(30) as usize);
            let alpha: f64 = rng.random();
            let bins = draw_bins(l, m, &mut rng).unwrap();
            let pmf = count_pmf(alpha, l).unwrap();
            let dist = CountDistribution::new(alpha, l).unwrap();
            let total: f64 = (1..=m).map(|j| bin_probability(&pmf, &bins, j).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-10);
            for j in 1..=m {
                let (lo, hi) = bins.interval(j).unwrap();
                let p = bin_probability(&pmf, &bins, j).unwrap();
                assert!((dist.interval_probability(lo, hi) - p).abs() < 1e-12);
                assert!((dist.outside_probability(lo, hi) - (1.0 - p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn outside_probability_resolves_tiny_tails() {
        let dist = CountDistribution::new(0.5, 10_000).unwrap();
        let miss = dist.outside_probability(0, 5_500);
        // P(K >= 5500) for Bin(10^4, 1/2) is about 4e-24.
        assert!(miss > 0.0 && miss < 1e-20, "{miss}");
        assert!(fidelity_deficit(miss) > 0.0);
    }

    #[test]
    fn certain_alpha_never_lands_in_wrong_bin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = GentleConfig::with_bin_count(1000, 0.3, 7).unwrap();
        for _ in 0..500 {
            let out = run_gentle_block(1.0, &cfg, &mut rng).unwrap();
            let (lo, hi) = out.bin_interval;
            assert!(lo <= 1000 && 1000 < hi);
            assert_ne!(out.failure_class, FailureClass::WrongBin);
            assert_eq!(out.bin_probability, 1.0);
        }
    }

    #[test]
    fn single_bin_always_succeeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = GentleConfig::with_bin_count(400, 0.2, 1).unwrap();
        for _ in 0..100 {
            let alpha: f64 = rng.random();
            let out = run_gentle_block(alpha, &cfg, &mut rng).unwrap();
            assert_eq!(out.failure_class, FailureClass::Success);
            assert_eq!(out.alpha_estimate, 401.0 / 800.0);
            assert_eq!(out.bin_index, 1);
        }
    }

    #[test]
    fn outcome_estimate_stays_in_bin() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let l = rng.random_range(2..5000u64);
            let s = rng.random_range(0.05..0.49);
            let cfg = GentleConfig::new(l, s).unwrap();
            let alpha: f64 = rng.random();
            let out = run_gentle_block(alpha, &cfg, &mut rng).unwrap();
            let (lo, hi) = out.bin_interval;
            assert!(out.alpha_estimate >= lo as f64 / l as f64 - 1e-15);
            assert!(out.alpha_estimate <= (hi as f64 / l as f64).min(1.0) + 1e-15);
            assert!((0.0..=1.0).contains(&out.bin_probability));
        }
    }

    #[test]
    fn run_block_is_deterministic() {
        let cfg = GentleConfig::new(10_000, 0.25).unwrap();
        let a = run_gentle_block(0.37, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let b = run_gentle_block(0.37, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(a, b);
        assert!(run_gentle_block(1.2, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).is_err());
    }

    #[test]
    fn boundary_on_count_is_too_close() {
        let l = 1000;
        let alpha = 0.4;
        let bins = BinPartition::new(l, vec![0, 400, 800, l + 1]).unwrap();
        assert_eq!(classify_failure(alpha, &bins, 1, 0.2), FailureClass::TooCloseBoundary);
        // Two-copy block: the hazard radius sqrt(2) ln 2 still exceeds zero distance.
        let tiny = BinPartition::new(2, vec![0, 1, 3]).unwrap();
        assert_eq!(classify_failure(0.5, &tiny, 2, 0.2), FailureClass::TooCloseBoundary);
    }

    #[test]
    fn classification_order_and_degenerate_cases() {
        let l = 1_000_000u64;
        let s = 0.3;
        // l alpha = 500000; hazard ~13816, window ~275000.
        let alpha = 0.5;
        let good = BinPartition::new(l, vec![0, 400_000, 600_000, l + 1]).unwrap();
        assert_eq!(classify_failure(alpha, &good, 2, s), FailureClass::Success);
        assert_eq!(classify_failure(alpha, &good, 1, s), FailureClass::WrongBin);
        let one_sided = BinPartition::new(l, vec![0, 400_000, 450_000, l + 1]).unwrap();
        assert_eq!(classify_failure(alpha, &one_sided, 3, s), FailureClass::NoNearbyBoundary);
        let far = BinPartition::new(l, vec![0, 100_000, 900_000, l + 1]).unwrap();
        assert_eq!(classify_failure(alpha, &far, 2, s), FailureClass::NoNearbyBoundary);
        let single = BinPartition::single(l);
        assert_eq!(classify_failure(alpha, &single, 1, s), FailureClass::Success);
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(entanglement_fidelity(1.0).unwrap(), 1.0);
        assert!((entanglement_fidelity(0.99).unwrap() - 0.99f64.sqrt()).abs() < 1e-16);
        assert!((entanglement_fidelity(0.99).unwrap() - 0.994987).abs() < 1e-6);
        assert!(entanglement_fidelity(1.01).is_err());
        let q = 1e-30;
        assert!((fidelity_deficit(q) - 0.5e-30).abs() < 1e-45);
    }

    #[test]
    fn config_bin_count_is_floor_of_power() {
        assert_eq!(GentleConfig::new(1000, 0.1).unwrap().bin_count, 1);
        assert_eq!(GentleConfig::new(10_000, 0.25).unwrap().bin_count, 10);
        assert_eq!(GentleConfig::new(1_000_000, 0.3).unwrap().bin_count, 63);
        assert!(GentleConfig::new(100, 0.5).is_err());
        assert!(GentleConfig::new(100, 0.0).is_err());
        assert!(GentleConfig::with_bin_count(10, 0.2, 11).is_err());
    }
}
