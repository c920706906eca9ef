//! PSD feasibility by cyclic Dykstra projections.
//!
//! Finds a density matrix satisfying interval constraints on expectation
//! values `lo <= <phi|X|phi> <= hi`. The sets are the slabs (one per
//! constraint) and the set of unit-trace PSD matrices; Dykstra's method
//! started at `I/d` converges to the feasible point closest to `I/d` in
//! Frobenius norm.

use super::BinConstraint;
use crate::error::{Error, Result};
use crate::qmath::{eig_hermitian, hermitize, trace, CMatrix, DensityMatrix, C64};

/// Iteration cap (full cycles over all sets).
pub const MAX_CYCLES: usize = 100_000;
/// Convergence tolerance on the largest slab violation.
pub const CONVERGENCE_TOL: f64 = 1e-9;

/// Consecutive near-still Dykstra cycles before probing for infeasibility.
pub const STALL_CYCLES: usize = 20;
const STALL_MOVE: f64 = 1e-13;
/// Cycle budget of one alternating-projection probe.
pub const PROBE_CYCLES: usize = 2_000;

/// Post-hoc certificate tolerances.
pub const CERT_MIN_EIGENVALUE: f64 = -1e-9;
pub const CERT_TRACE: f64 = 1e-9;
pub const CERT_SLACK: f64 = 1e-7;

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Projection onto `{X >= 0, tr X = 1}`.
pub fn project_to_states(x: &CMatrix) -> CMatrix {
    let eig = eig_hermitian(&hermitize(x)).expect("iterates are Hermitian");
    let clipped = project_to_simplex(&eig.eigenvalues);
    let d = x.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (mu, v) in clipped.iter().zip(&eig.eigenvectors) {
        if *mu > 0.0 {
            out += v.projector().map(|z| z * *mu);
        }
    }
    hermitize(&out)
}

fn expectation(x: &CMatrix, c: &BinConstraint) -> f64 {
    let v = c.phi.amplitudes();
    v.dotc(&(x * v)).re
}

fn violation(x: &CMatrix, c: &BinConstraint) -> f64 {
    let e = expectation(x, c);
    (c.lo - e).max(e - c.hi).max(0.0)
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest constraint violation of `x`.
pub fn max_violation(x: &CMatrix, constraints: &[BinConstraint]) -> f64 {
    constraints.iter().map(|c| violation(x, c)).fold(0.0, f64::max)
}

/// Independent check that `rho` is a state satisfying every constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub max_slack: f64,
}

impl Certificate {
    pub fn check(x: &CMatrix, constraints: &[BinConstraint]) -> Self {
        let eig = eig_hermitian(&hermitize(x)).expect("Hermitian input");
        Self {
            min_eigenvalue: eig.min_eigenvalue(),
            trace_error: (trace(x).re - 1.0).abs(),
            max_slack: max_violation(x, constraints),
        }
    }

    pub fn passes(&self) -> bool {
        self.min_eigenvalue >= CERT_MIN_EIGENVALUE && self.trace_error <= CERT_TRACE && self.max_slack <= CERT_SLACK
    }
}

fn project_to_slab(y: &CMatrix, c: &BinConstraint, projector: &CMatrix) -> CMatrix {
    let e = expectation(y, c);
    let shift = e.clamp(c.lo, c.hi) - e;
    y + projector.map(|z| z * shift)
}

enum Probe {
    Feasible(CMatrix),
    Infeasible(f64),
    Undecided,
}

/// Plain cyclic projections from `start`. When the sets intersect, every
/// fixed point of the cycle lies in the intersection, so settling at a
/// violating point is evidence of infeasibility.
fn probe(start: &CMatrix, constraints: &[BinConstraint], projectors: &[CMatrix]) -> Probe {
    let mut x = start.clone();
    for _ in 0..PROBE_CYCLES {
        let previous = x.clone();
        for (c, p) in constraints.iter().zip(projectors) {
            x = project_to_slab(&x, c, p);
        }
        x = project_to_states(&x);
        let viol = max_violation(&x, constraints);
        if viol <= CONVERGENCE_TOL {
            return Probe::Feasible(x);
        }
        if frobenius(&(&x - &previous)) < STALL_MOVE && viol > CERT_SLACK {
            return Probe::Infeasible(viol);
        }
    }
    Probe::Undecided
}

/// Finds a density matrix consistent with every constraint.
///
/// Returns [`Error::Infeasible`] when an alternating-projection probe settles
/// at a violating point or the cycle budget runs out.
pub fn feasibility_solve(constraints: &[BinConstraint], d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if let Some(c) = constraints.iter().find(|c| c.phi.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: c.phi.dim() });
    }
    if constraints.iter().any(|c| c.lo > c.hi) {
        return Err(Error::Infeasible { iterations: 0, violation: f64::INFINITY });
    }
    let mut x = CMatrix::identity(d, d).map(|z| z / d as f64);
    let projectors: Vec<CMatrix> = constraints.iter().map(|c| c.phi.projector()).collect();
    let mut increments = vec![CMatrix::zeros(d, d); constraints.len() + 1];
    let mut stalled = 0;
    let mut viol = max_violation(&x, constraints);
    let mut cycles = 0;
    while viol > CONVERGENCE_TOL {
        if cycles == MAX_CYCLES {
            return Err(Error::Infeasible { iterations: cycles, violation: viol });
        }
        cycles += 1;
        let previous = x.clone();
        for (i, c) in constraints.iter().enumerate() {
            let y = &x + &increments[i];
            let projected = project_to_slab(&y, c, &projectors[i]);
            increments[i] = y - &projected;
            x = projected;
        }
        let last = constraints.len();
        let y = &x + &increments[last];
        let projected = project_to_states(&y);
        increments[last] = y - &projected;
        x = projected;
        viol = max_violation(&x, constraints);

        if frobenius(&(&x - &previous)) < STALL_MOVE {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if stalled >= STALL_CYCLES && viol > CONVERGENCE_TOL {
            stalled = 0;
            match probe(&x, constraints, &projectors) {
                Probe::Feasible(found) => {
                    x = found;
                    break;
                }
                Probe::Infeasible(v) => return Err(Error::Infeasible { iterations: cycles, violation: v }),
                Probe::Undecided => {}
            }
        }
    }
    let cert = Certificate::check(&x, constraints);
    if !cert.passes() {
        return Err(Error::Infeasible { iterations: cycles, violation: cert.max_slack });
    }
    DensityMatrix::from_psd_unnormalized(x.map(|z: C64| z))
}
