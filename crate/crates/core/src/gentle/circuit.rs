//! Statevector simulation of the gentle measurement circuit on qubit copies.
//!
//! Registers: `n` system qubits, a counter of dimension `n + 1`, and a bin
//! register of dimension `m`. The circuit applies a controlled `+1` on the
//! counter for every copy (control: the copy is in `|phi>`), computes the bin
//! of the counter into the bin register, measures the bin register, then runs
//! the bin computation and the counting backwards.
//!
//! Mixed inputs are handled through a purification stored as branch vectors
//! `psi_r` with `rho = sum_r |psi_r><psi_r|`; the reference system is never
//! touched, so each branch evolves independently.

use nalgebra::DVector;
use rand::Rng;

use super::collective::{collective_operators, DENSITY_CAP};
use super::BinPartition;
use crate::error::{Error, Result};
use crate::qmath::{eig_hermitian, CMatrix, DensityMatrix, PureStateVector, C64};

/// Largest number of qubit copies the circuit backend accepts.
pub const CIRCUIT_CAP: usize = 12;

const ANCILLA_TOL: f64 = 1e-10;

/// Joint state of `n` qubit copies, stored as a purification.
#[derive(Clone, Debug)]
pub struct SmallSimState {
    copies: usize,
    branches: Vec<DVector<C64>>,
}

impl SmallSimState {
    /// Purification of `rho^{(x) n}` built copy by copy from the spectrum of `rho`.
    pub fn product(rho: &DensityMatrix, copies: usize) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: rho.dim() });
        }
        check_cap(copies)?;
        let eig = eig_hermitian(rho.matrix())?;
        let local: Vec<DVector<C64>> = eig
            .eigenvalues
            .iter()
            .zip(&eig.eigenvectors)
            .filter(|(l, _)| **l > 1e-15)
            .map(|(l, v)| v.amplitudes() * C64::new(l.sqrt(), 0.0))
            .collect();
        let mut branches = vec![DVector::from_element(1, C64::new(1.0, 0.0))];
        for _ in 0..copies {
            branches = branches.iter().flat_map(|b| local.iter().map(move |u| b.kronecker(u))).collect();
        }
        Ok(Self { copies, branches })
    }

    pub fn pure(copies: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_cap(copies)?;
        if amplitudes.len() != 1 << copies {
            return Err(Error::DimensionMismatch { expected: 1 << copies, found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { copies, branches: vec![amplitudes] })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn branches(&self) -> &[DVector<C64>] {
        &self.branches
    }

    pub fn norm_sqr(&self) -> f64 {
        self.branches.iter().map(|b| b.norm_squared()).sum()
    }

    /// The joint density matrix `sum_r |psi_r><psi_r|`.
    pub fn density_matrix(&self) -> CMatrix {
        let dim = 1 << self.copies;
        let mut m = CMatrix::zeros(dim, dim);
        for b in &self.branches {
            m += b * b.adjoint();
        }
        m
    }

    /// Overlap `<Phi|Phi'>` of the purifications, branch by branch.
    pub fn purified_overlap(&self, other: &Self) -> C64 {
        self.branches.iter().zip(&other.branches).map(|(a, b)| a.dotc(b)).sum()
    }
}

fn check_cap(copies: usize) -> Result<()> {
    if copies == 0 || copies > CIRCUIT_CAP {
        return Err(Error::CapExceeded { requested: copies, cap: CIRCUIT_CAP });
    }
    Ok(())
}

/// Register layout and gates for one `(n, phi, bins)` configuration.
#[derive(Clone, Debug)]
pub struct GentleCircuit {
    copies: usize,
    phi: [C64; 2],
    /// 0-based bin of each count value.
    bin_of_count: Vec<usize>,
    bins: usize,
}

/// Result of one shot of the circuit.
#[derive(Clone, Debug)]
pub struct CircuitOutcome {
    /// 1-based measured bin.
    pub bin_index: usize,
    /// Born probability of the measured bin in the simulated circuit.
    pub probability: f64,
    pub post_state: SmallSimState,
    /// Norm of the amplitude left outside `|0>_count |0>_bin` after uncomputation.
    pub ancilla_residual: f64,
    /// `<Phi|Phi'>` between input and output purifications.
    pub fidelity: f64,
}

impl GentleCircuit {
    pub fn new(copies: usize, phi: &PureStateVector, bins: &BinPartition) -> Result<Self> {
        check_cap(copies)?;
        if phi.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: phi.dim() });
        }
        if bins.block_length() != copies as u64 {
            return Err(Error::InvalidBins(format!(
                "bins built for {} copies, circuit has {copies}",
                bins.block_length()
            )));
        }
        let bin_of_count = (0..=copies as u64).map(|k| bins.bin_of(k) - 1).collect();
        let a = phi.amplitudes();
        Ok(Self { copies, phi: [a[0], a[1]], bin_of_count, bins: bins.bin_count() })
    }

    /// Number of gates: `2n` controlled counter steps plus two BIN evaluations.
    pub fn gate_count(&self) -> usize {
        2 * self.copies + 2
    }

    fn counter_dim(&self) -> usize {
        self.copies + 1
    }

    fn register_len(&self) -> usize {
        (1 << self.copies) * self.counter_dim() * self.bins
    }

    fn index(&self, sys: usize, count: usize, bin: usize) -> usize {
        (sys * self.counter_dim() + count) * self.bins + bin
    }

    /// Embeds a system vector with both ancillas in `|0>`.
    fn embed(&self, sys: &DVector<C64>) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.register_len()];
        for (s, a) in sys.iter().enumerate() {
            v[self.index(s, 0, 0)] = *a;
        }
        v
    }

    /// Controlled shift of the counter by `step` (+1 or -1), controlled on copy `copy` being `|phi>`.
    fn controlled_shift(&self, state: &[C64], copy: usize, step: isize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        let dim = self.counter_dim();
        let mask = 1usize << (self.copies - 1 - copy);
        let [p0, p1] = self.phi;
        for s0 in (0..(1usize << self.copies)).filter(|s| s & mask == 0) {
            let s1 = s0 | mask;
            for c in 0..dim {
                let shifted = (c as isize + step).rem_euclid(dim as isize) as usize;
                for b in 0..self.bins {
                    let a0 = state[self.index(s0, c, b)];
                    let a1 = state[self.index(s1, c, b)];
                    let along = p0.conj() * a0 + p1.conj() * a1;
                    out[self.index(s0, c, b)] += a0 - along * p0;
                    out[self.index(s1, c, b)] += a1 - along * p1;
                    out[self.index(s0, shifted, b)] += along * p0;
                    out[self.index(s1, shifted, b)] += along * p1;
                }
            }
        }
        out
    }

    /// `|c>|b> -> |c>|b + sign * bin(c) mod m>`.
    fn bin_gate(&self, state: &[C64], sign: isize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        let m = self.bins as isize;
        for s in 0..(1usize << self.copies) {
            for c in 0..self.counter_dim() {
                let shift = self.bin_of_count[c] as isize * sign;
                for b in 0..self.bins {
                    let target = (b as isize + shift).rem_euclid(m) as usize;
                    out[self.index(s, c, target)] = state[self.index(s, c, b)];
                }
            }
        }
        out
    }

    fn forward(&self, sys: &DVector<C64>) -> Vec<C64> {
        let mut v = self.embed(sys);
        for copy in 0..self.copies {
            v = self.controlled_shift(&v, copy, 1);
        }
        self.bin_gate(&v, 1)
    }

    fn backward(&self, mut v: Vec<C64>) -> Vec<C64> {
        v = self.bin_gate(&v, -1);
        for copy in (0..self.copies).rev() {
            v = self.controlled_shift(&v, copy, -1);
        }
        v
    }

    fn bin_weights(&self, v: &[C64]) -> Vec<f64> {
        let mut w = vec![0.0; self.bins];
        for (i, a) in v.iter().enumerate() {
            w[i % self.bins] += a.norm_sqr();
        }
        w
    }

    /// Born probabilities of the bin register before measurement.
    pub fn outcome_probabilities(&self, state: &SmallSimState) -> Result<Vec<f64>> {
        self.check_state(state)?;
        let mut probs = vec![0.0; self.bins];
        for b in &state.branches {
            for (p, w) in probs.iter_mut().zip(self.bin_weights(&self.forward(b))) {
                *p += w;
            }
        }
        Ok(probs)
    }

    fn check_state(&self, state: &SmallSimState) -> Result<()> {
        if state.copies != self.copies {
            return Err(Error::DimensionMismatch { expected: self.copies, found: state.copies });
        }
        Ok(())
    }

    /// Projects onto bin `j` (1-based), renormalizes, and uncomputes the ancillas.
    pub fn collapse(&self, state: &SmallSimState, j: usize, probability: f64) -> Result<CircuitOutcome> {
        self.check_state(state)?;
        if j == 0 || j > self.bins {
            return Err(Error::InvalidBins(format!("bin index {j} outside 1..={}", self.bins)));
        }
        if probability.is_nan() || probability <= 0.0 {
            return Err(Error::OutOfRange { what: "outcome probability", value: probability });
        }
        let scale = C64::new(1.0 / probability.sqrt(), 0.0);
        let mut residual = 0.0;
        let mut branches = Vec::with_capacity(state.branches.len());
        for b in &state.branches {
            let mut v = self.forward(b);
            for (i, a) in v.iter_mut().enumerate() {
                *a = if i % self.bins == j - 1 { *a * scale } else { C64::new(0.0, 0.0) };
            }
            let v = self.backward(v);
            let mut sys = DVector::from_element(1 << self.copies, C64::new(0.0, 0.0));
            for (s, out) in sys.iter_mut().enumerate() {
                *out = v[self.index(s, 0, 0)];
            }
            let stride = self.counter_dim() * self.bins;
            residual += v
                .iter()
                .enumerate()
                .filter(|(i, _)| i % stride != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum::<f64>();
            branches.push(sys);
        }
        let post_state = SmallSimState { copies: self.copies, branches };
        let fidelity = state.purified_overlap(&post_state).re;
        Ok(CircuitOutcome { bin_index: j, probability, post_state, ancilla_residual: residual.sqrt(), fidelity })
    }

    /// Samples a bin from the circuit's Born probabilities.
    pub fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
        let mut acc = 0.0;
        let mut last = 1;
        for (j, p) in probs.iter().enumerate() {
            if *p > 0.0 {
                last = j + 1;
                acc += p;
                if u < acc {
                    return j + 1;
                }
            }
        }
        last
    }
}

/// One shot of the gentle measurement circuit: count, bin, measure, uncompute.
pub fn simulate_gentle_circuit<R: Rng + ?Sized>(
    state: &SmallSimState,
    phi: &PureStateVector,
    bins: &BinPartition,
    rng: &mut R,
) -> Result<CircuitOutcome> {
    let circuit = GentleCircuit::new(state.copies(), phi, bins)?;
    let probs = circuit.outcome_probabilities(state)?;
    let j = GentleCircuit::sample(&probs, rng);
    let outcome = circuit.collapse(state, j, probs[j - 1])?;
    if outcome.ancilla_residual > ANCILLA_TOL {
        return Err(Error::OutOfRange { what: "ancilla residual", value: outcome.ancilla_residual });
    }
    Ok(outcome)
}

/// `M'_j rho M'_j / p` computed from the explicit collective operators.
///
/// Returns the projected state and `p = tr(M'_j rho)`.
pub fn projected_state_from_operators(
    joint: &CMatrix,
    phi: &PureStateVector,
    bins: &BinPartition,
    j: usize,
) -> Result<(CMatrix, f64)> {
    let l = bins.block_length() as usize;
    if l > DENSITY_CAP {
        return Err(Error::CapExceeded { requested: l, cap: DENSITY_CAP });
    }
    let (lo, hi) = bins.interval(j)?;
    let ops = collective_operators(phi, l)?;
    let dim = joint.nrows();
    let mut proj = CMatrix::zeros(dim, dim);
    for k in lo..hi.min(l as u64 + 1) {
        proj += &ops[k as usize];
    }
    let unnorm = &proj * joint * &proj;
    let p: f64 = (0..dim).map(|i| unnorm[(i, i)].re).sum();
    Ok((unnorm.map(|z| z / p), p))
}
