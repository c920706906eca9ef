//! Probability that the payload reaches `nR` bits.
//!
//! Raw Monte Carlo is used when the event is common. Otherwise symbols are
//! drawn from the exponentially tilted law `q_theta(i) ∝ q_i 2^{theta l_i}`
//! (with `l_i` the model code length of symbol `i`), tuned so the mean code
//! length is `R`, and each hit is reweighted by the exact likelihood ratio
//! `2^{-theta sum l} M(theta)^n`.

use crate::codec::{diagonal_distribution, encode, payload_cap, sample_symbols, RegularizedEstimate};
use crate::error::{Error, Result};
use crate::qmath::DensityMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Raw estimates above this are trusted without tilting.
pub const RAW_THRESHOLD: f64 = 1e-3;
/// Minimum raw hits to trust a raw estimate.
pub const MIN_RAW_HITS: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OverflowMethod {
    /// The threshold exceeds the largest possible payload.
    Impossible,
    Raw,
    Tilted { theta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverflowEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub hits: u64,
    pub trials: u64,
    pub method: OverflowMethod,
    /// `probability` is a Chernoff upper bound because no tilted sample hit.
    pub upper_bound: bool,
}

/// `log2 M(theta)` with `M(theta) = sum_i q_i 2^{theta l_i}`.
pub fn log2_mgf(q: &[f64], lengths: &[f64], theta: f64) -> f64 {
    let top = q
        .iter()
        .zip(lengths)
        .filter(|(qi, _)| **qi > 0.0)
        .map(|(_, l)| theta * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = q.iter().zip(lengths).map(|(qi, l)| qi * (theta * l - top).exp2()).sum();
    top + sum.log2()
}

/// Tilted law and its mean code length.
pub fn tilt(q: &[f64], lengths: &[f64], theta: f64) -> (Vec<f64>, f64) {
    let lm = log2_mgf(q, lengths, theta);
    let qt: Vec<f64> = q.iter().zip(lengths).map(|(qi, l)| qi * (theta * l - lm).exp2()).collect();
    let mean = qt.iter().zip(lengths).map(|(p, l)| p * l).sum();
    (qt, mean)
}

/// `theta >= 0` whose tilted mean code length equals `r` (clamped to the achievable range).
pub fn solve_theta(q: &[f64], lengths: &[f64], r: f64) -> f64 {
    let (_, base) = tilt(q, lengths, 0.0);
    if r <= base {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while tilt(q, lengths, hi).1 < r && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilt(q, lengths, mid).1 < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Estimates `Pr[payload bits >= n R]` for symbols drawn i.i.d. from the
/// diagonal of `rho` in the estimate's basis.
pub fn overflow_probability_mc<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    est: &RegularizedEstimate,
    n: u64,
    r: f64,
    trials: u64,
    rng: &mut R,
) -> Result<OverflowEstimate> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::OutOfRange { what: "rate R", value: r });
    }
    if n == 0 || trials == 0 {
        return Err(Error::Config("overflow estimate needs n >= 1 and trials >= 1".into()));
    }
    let threshold = n as f64 * r;
    if threshold > payload_cap(n, est.d) as f64 {
        return Ok(OverflowEstimate {
            probability: 0.0,
            std_error: 0.0,
            hits: 0,
            trials: 0,
            method: OverflowMethod::Impossible,
            upper_bound: false,
        });
    }
    let q = diagonal_distribution(rho, est)?;
    let lengths: Vec<f64> = (0..est.d).map(|i| est.code_length(i)).collect();

    let mut hits = 0u64;
    for _ in 0..trials {
        let symbols = sample_symbols(&q, n, rng)?;
        if encode(&symbols, est)?.payload_bits as f64 >= threshold {
            hits += 1;
        }
    }
    let p = hits as f64 / trials as f64;
    if p > RAW_THRESHOLD && hits >= MIN_RAW_HITS {
        return Ok(OverflowEstimate {
            probability: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            hits,
            trials,
            method: OverflowMethod::Raw,
            upper_bound: false,
        });
    }

    let theta = solve_theta(&q, &lengths, r);
    let (qt, _) = tilt(&q, &lengths, theta);
    let lm = log2_mgf(&q, &lengths, theta);
    // log2 weights of hits; non-hits contribute zero.
    let mut log_weights = Vec::new();
    for _ in 0..trials {
        let symbols = sample_symbols(&qt, n, rng)?;
        if encode(&symbols, est)?.payload_bits as f64 >= threshold {
            let total: f64 = symbols.iter().map(|&s| lengths[s as usize]).sum();
            log_weights.push(-theta * total + n as f64 * lm);
        }
    }
    if log_weights.is_empty() {
        // Chernoff: Pr[sum l >= nR - 2] <= 2^{-(theta (nR - 2) - n log2 M)}.
        let bound = (-(theta * (threshold - 2.0) - n as f64 * lm)).exp2().min(1.0);
        return Ok(OverflowEstimate {
            probability: bound,
            std_error: 0.0,
            hits: 0,
            trials,
            method: OverflowMethod::Tilted { theta },
            upper_bound: true,
        });
    }
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_weights.iter().map(|w| (w - top).exp2()).collect();
    let t = trials as f64;
    let mean_scaled = scaled.iter().sum::<f64>() / t;
    let second_scaled = scaled.iter().map(|x| x * x).sum::<f64>() / t;
    let var_scaled = (second_scaled - mean_scaled * mean_scaled).max(0.0) * t / (t - 1.0).max(1.0);
    let factor = top.exp2();
    Ok(OverflowEstimate {
        probability: mean_scaled * factor,
        std_error: (var_scaled / t).sqrt() * factor,
        hits: log_weights.len() as u64,
        trials,
        method: OverflowMethod::Tilted { theta },
        upper_bound: false,
    })
}
