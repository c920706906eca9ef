//! Gentle tomography over the eigenvectors of a traceless basis.
//!
//! The first `l * d(d^2-1)` copies are split into blocks of length `l`; block
//! `(k, i)` gently measures the `i`-th eigenvector of basis element `k`. The
//! resulting bins become interval constraints and a feasible state is found by
//! [`feasibility_solve`].

pub mod feasibility;

pub use feasibility::{feasibility_solve, Certificate};

use crate::error::{Error, Result};
use crate::gentle::{measure_block, CountDistribution, FailureClass, GentleConfig, GentleOutcome};
use crate::qmath::{bloch_decompose, eig_hermitian, gell_mann_basis, DensityMatrix, PureStateVector, TracelessBasis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One block of the schedule. `k` and `i` are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub k: usize,
    pub i: usize,
    /// Half-open copy range.
    pub range: (u64, u64),
    pub vector: PureStateVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSchedule {
    pub n: u64,
    pub d: usize,
    pub block_length: u64,
    pub blocks: Vec<Block>,
}

impl BlockSchedule {
    /// Copies not assigned to any block.
    pub fn leftover(&self) -> u64 {
        self.n - self.block_length * self.blocks.len() as u64
    }
}

/// Number of blocks, `d(d^2-1)`.
pub fn block_count(d: usize) -> u64 {
    (d * (d * d - 1)) as u64
}

/// Splits `n` copies into `d(d^2-1)` blocks tagged with basis eigenvectors.
pub fn block_schedule(n: u64, d: usize, basis: &TracelessBasis) -> Result<BlockSchedule> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if basis.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: basis.dim() });
    }
    let count = block_count(d);
    if n < count {
        return Err(Error::TooFewCopies { n, blocks: count });
    }
    let l = n / count;
    let mut blocks = Vec::with_capacity(count as usize);
    for (k0, sigma) in basis.elements().iter().enumerate() {
        let eig = eig_hermitian(sigma)?;
        for (i0, v) in eig.eigenvectors.into_iter().enumerate() {
            let idx = blocks.len() as u64;
            blocks.push(Block { k: k0 + 1, i: i0 + 1, range: (idx * l, (idx + 1) * l), vector: v });
        }
    }
    Ok(BlockSchedule { n, d, block_length: l, blocks })
}

/// `lo <= <phi|rho|phi> <= hi` in frequency units.
#[derive(Clone, Debug, PartialEq)]
pub struct BinConstraint {
    pub lo: f64,
    pub hi: f64,
    pub phi: PureStateVector,
}

impl BinConstraint {
    pub fn new(lo: f64, hi: f64, phi: PureStateVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidBins(format!("constraint [{lo}, {hi}] not inside [0, 1]")));
        }
        Ok(Self { lo, hi, phi })
    }

    /// Converts a count interval `[lo, hi)` of a length-`l` block.
    pub fn from_counts(interval: (u64, u64), l: u64, phi: PureStateVector) -> Self {
        let lf = l as f64;
        let lo = (interval.0 as f64 / lf).clamp(0.0, 1.0);
        let hi = (interval.1 as f64 / lf).clamp(lo, 1.0);
        Self { lo, hi, phi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, rho: &DensityMatrix) -> bool {
        let a = rho.expectation(&self.phi);
        self.lo <= a && a <= self.hi
    }
}

/// `d^{5/2} * epsilon`.
pub fn trace_norm_error_bound(epsilon: f64, d: usize) -> f64 {
    (d as f64).powf(2.5) * epsilon.max(0.0)
}

/// Outcomes and constraints from one pass over the schedule, before solving.
#[derive(Clone, Debug, PartialEq)]
pub struct TomographyMeasurement {
    pub d: usize,
    pub block_length: u64,
    pub constraints: Vec<BinConstraint>,
    pub per_block_outcomes: Vec<GentleOutcome>,
}

impl TomographyMeasurement {
    /// Ground-truth view: every block landed in a success class.
    pub fn declared_success(&self) -> bool {
        self.per_block_outcomes.iter().all(|o| o.failure_class.is_success())
    }

    pub fn epsilon(&self) -> f64 {
        self.constraints.iter().map(BinConstraint::width).fold(0.0, f64::max)
    }

    /// Product of per-block entanglement fidelities.
    pub fn fidelity_proxy(&self) -> f64 {
        self.per_block_outcomes.iter().map(GentleOutcome::fidelity).product()
    }

    /// Solves for a feasible estimate.
    pub fn estimate(self) -> Result<TomographyResult> {
        let estimate = feasibility_solve(&self.constraints, self.d)?;
        let epsilon = self.epsilon();
        let fidelity_proxy = self.fidelity_proxy();
        let declared_success = self.declared_success();
        Ok(TomographyResult {
            estimate,
            declared_success,
            encoder_knows_failure: false,
            epsilon,
            trace_norm_bound: trace_norm_error_bound(epsilon, self.d),
            fidelity_proxy,
            block_length: self.block_length,
            constraints: self.constraints,
            per_block_outcomes: self.per_block_outcomes,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TomographyResult {
    pub estimate: DensityMatrix,
    pub constraints: Vec<BinConstraint>,
    pub per_block_outcomes: Vec<GentleOutcome>,
    pub declared_success: bool,
    /// What a real encoder can tell about failure: nothing.
    pub encoder_knows_failure: bool,
    pub epsilon: f64,
    pub trace_norm_bound: f64,
    pub fidelity_proxy: f64,
    pub block_length: u64,
}

/// Schedule and per-block count distributions for a fixed ground truth.
///
/// Building the distributions is the expensive part; a plan can be reused
/// across many seeds.
#[derive(Clone, Debug)]
pub struct TomographyPlan {
    schedule: BlockSchedule,
    config: GentleConfig,
    distributions: Vec<CountDistribution>,
}

impl TomographyPlan {
    pub fn new(rho_true: &DensityMatrix, n: u64, s: f64) -> Result<Self> {
        let d = rho_true.dim();
        let basis = gell_mann_basis(d)?;
        let schedule = block_schedule(n, d, &basis)?;
        let config = GentleConfig::new(schedule.block_length, s)?;
        let distributions = schedule
            .blocks
            .iter()
            .map(|b| CountDistribution::new(rho_true.expectation(&b.vector).clamp(0.0, 1.0), schedule.block_length))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { schedule, config, distributions })
    }

    pub fn schedule(&self) -> &BlockSchedule {
        &self.schedule
    }

    pub fn config(&self) -> &GentleConfig {
        &self.config
    }

    /// True `alpha` per block.
    pub fn alphas(&self) -> Vec<f64> {
        self.distributions.iter().map(CountDistribution::alpha).collect()
    }

    /// Measures every block, each with its own sub-seed drawn from `rng`.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> TomographyMeasurement {
        let seeds: Vec<u64> = self.schedule.blocks.iter().map(|_| rng.random()).collect();
        let l = self.schedule.block_length;
        let mut constraints = Vec::with_capacity(seeds.len());
        let mut outcomes = Vec::with_capacity(seeds.len());
        for ((block, dist), seed) in self.schedule.blocks.iter().zip(&self.distributions).zip(seeds) {
            let mut sub = ChaCha8Rng::seed_from_u64(seed);
            let outcome = measure_block(dist, &self.config, &mut sub).expect("plan config is valid");
            constraints.push(BinConstraint::from_counts(outcome.bin_interval, l, block.vector.clone()));
            outcomes.push(outcome);
        }
        TomographyMeasurement { d: self.schedule.d, block_length: l, constraints, per_block_outcomes: outcomes }
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TomographyResult> {
        self.measure(rng).estimate()
    }
}

/// Full gentle tomography of `rho_true^{(x) n}`.
pub fn run_gentle_tomography<R: Rng + ?Sized>(
    rho_true: &DensityMatrix,
    n: u64,
    s: f64,
    rng: &mut R,
) -> Result<TomographyResult> {
    TomographyPlan::new(rho_true, n, s)?.run(rng)
}

/// JSON view of a [`TomographyResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyResultJson {
    pub d: usize,
    pub estimate_bloch: Vec<f64>,
    pub constraints: Vec<ConstraintJson>,
    pub outcome_classes: Vec<FailureClass>,
    pub declared_success: bool,
    pub encoder_knows_failure: bool,
    pub epsilon: f64,
    pub trace_norm_bound: f64,
    pub fidelity_proxy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub lo: f64,
    pub hi: f64,
    /// Amplitudes as `[re, im]` pairs.
    pub phi: Vec<[f64; 2]>,
}

impl TomographyResult {
    pub fn to_json(&self) -> Result<TomographyResultJson> {
        let d = self.estimate.dim();
        Ok(TomographyResultJson {
            d,
            estimate_bloch: bloch_decompose(&self.estimate, &gell_mann_basis(d)?)?,
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintJson {
                    lo: c.lo,
                    hi: c.hi,
                    phi: c.phi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
            outcome_classes: self.per_block_outcomes.iter().map(|o| o.failure_class).collect(),
            declared_success: self.declared_success,
            encoder_knows_failure: self.encoder_knows_failure,
            epsilon: self.epsilon,
            trace_norm_bound: self.trace_norm_bound,
            fidelity_proxy: self.fidelity_proxy,
        })
    }
}
