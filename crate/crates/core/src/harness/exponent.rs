//! Overflow exponent `K(R)`: the smallest averaged measured relative entropy
//! `1/(d(d^2-1)) sum_k D(M_k(sigma) || M_k(rho))` over states with
//! `S(sigma) >= R`, where `M_k` measures in the eigenbasis of `sigma_k`.
//!
//! The objective is convex in `sigma` and vanishes only at `rho`, so when
//! `S(rho) < R` the minimum sits on the entropy level set. For qubits that
//! set is a sphere in the Bloch ball, searched by a grid and then a shrinking
//! pattern search. Larger `d` uses multi-start local search and is flagged
//! as not certified.

use crate::error::{Error, Result};
use crate::qmath::{
    bloch_decompose, bloch_reconstruct, eig_hermitian, measured_distribution, random_density_matrix,
    von_neumann_entropy, CMatrix, DensityMatrix, PureStateVector, TracelessBasis,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Random starting states for the d > 2 search (the source itself is always one more).
pub const MULTI_STARTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub k: f64,
    /// Grid-plus-refinement optimizer with a convexity argument (d = 2 only).
    pub certified: bool,
    /// Bloch coefficients of the minimizing state.
    pub minimizer: Vec<f64>,
}

/// Classical relative entropy in bits; infinite when `p` is not dominated by `q`.
pub fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi <= 0.0 {
                0.0
            } else if qi <= 0.0 {
                f64::INFINITY
            } else {
                pi * (pi / qi).log2()
            }
        })
        .sum::<f64>()
        .max(0.0)
}

/// Binary entropy in bits.
fn h2(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

struct Objective {
    d: usize,
    bases: Vec<Vec<PureStateVector>>,
    reference: Vec<Vec<f64>>,
    basis: TracelessBasis,
}

impl Objective {
    fn new(rho: &DensityMatrix, basis: &TracelessBasis) -> Result<Self> {
        let bases = basis
            .elements()
            .iter()
            .map(|s| eig_hermitian(s).map(|e| e.eigenvectors))
            .collect::<Result<Vec<_>>>()?;
        let reference = bases.iter().map(|b| measured_distribution(rho, b)).collect::<Result<Vec<_>>>()?;
        Ok(Self { d: rho.dim(), bases, reference, basis: basis.clone() })
    }

    fn value(&self, sigma: &DensityMatrix) -> f64 {
        let total: f64 = self
            .bases
            .iter()
            .zip(&self.reference)
            .map(|(b, r)| kl_bits(&measured_distribution(sigma, b).expect("dimensions agree"), r))
            .sum();
        total / (self.d * (self.d * self.d - 1)) as f64
    }

    fn state(&self, c: &[f64]) -> Option<DensityMatrix> {
        let m: CMatrix = bloch_reconstruct(c, self.d, &self.basis).ok()?;
        DensityMatrix::from_psd_unnormalized(m).ok()
    }
}

/// `K(R)` for source `rho`.
pub fn overflow_exponent_analytic(rho: &DensityMatrix, r: f64, basis: &TracelessBasis) -> Result<ExponentResult> {
    let d = rho.dim();
    if basis.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: basis.dim() });
    }
    let max = (d as f64).log2();
    if !(0.0..=max + 1e-12).contains(&r) {
        return Err(Error::OutOfRange { what: "rate R", value: r });
    }
    if von_neumann_entropy(rho) >= r {
        return Ok(ExponentResult { k: 0.0, certified: true, minimizer: bloch_decompose(rho, basis)? });
    }
    let objective = Objective::new(rho, basis)?;
    if d == 2 {
        Ok(qubit_search(&objective, r))
    } else {
        multi_start(&objective, rho, r)
    }
}

/// Bloch radius `|r|` with `h((1 + |r|)/2) = R`.
pub fn qubit_radius(r: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2((1.0 + mid) / 2.0) >= r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn qubit_search(obj: &Objective, r: f64) -> ExponentResult {
    // Gell-Mann coefficients are the Bloch vector over sqrt(2).
    let radius = qubit_radius(r) / 2f64.sqrt();
    let point = |theta: f64, phi: f64| {
        vec![
            radius * theta.sin() * phi.cos(),
            radius * theta.sin() * phi.sin(),
            radius * theta.cos(),
        ]
    };
    let eval = |theta: f64, phi: f64| obj.state(&point(theta, phi)).map_or(f64::INFINITY, |s| obj.value(&s));
    let (nt, np) = (90usize, 180usize);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=nt {
        let theta = std::f64::consts::PI * i as f64 / nt as f64;
        for j in 0..np {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / np as f64;
            let v = eval(theta, phi);
            if v < best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let mut step = std::f64::consts::PI / nt as f64;
    while step > 1e-12 {
        let mut improved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = eval(best.1 + dt, best.2 + dp);
            if v < best.0 {
                best = (v, best.1 + dt, best.2 + dp);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    ExponentResult { k: best.0, certified: true, minimizer: point(best.1, best.2) }
}

/// Moves `c` toward `I/d` until `S >= r`.
fn onto_level_set(obj: &Objective, c: &[f64], r: f64) -> Option<(Vec<f64>, DensityMatrix)> {
    let at = |t: f64| -> Option<(Vec<f64>, DensityMatrix)> {
        let scaled: Vec<f64> = c.iter().map(|x| x * t).collect();
        obj.state(&scaled).map(|s| (scaled, s))
    };
    let (c1, s1) = at(1.0)?;
    if von_neumann_entropy(&s1) >= r {
        return Some((c1, s1));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        match at(mid) {
            Some((_, s)) if von_neumann_entropy(&s) >= r => lo = mid,
            _ => hi = mid,
        }
    }
    at(lo)
}

fn multi_start(obj: &Objective, rho: &DensityMatrix, r: f64) -> Result<ExponentResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let dim = obj.basis.len();
    let mut starts = vec![bloch_decompose(rho, &obj.basis)?];
    for _ in 0..MULTI_STARTS {
        starts.push(bloch_decompose(&random_density_matrix(obj.d, &mut rng)?, &obj.basis)?);
    }
    let mut best = (f64::INFINITY, vec![0.0; dim]);
    for start in starts {
        let Some((mut c, s)) = onto_level_set(obj, &start, r) else { continue };
        let mut value = obj.value(&s);
        let mut step = 0.1;
        while step > 1e-6 {
            let mut improved = false;
            for _ in 0..2 * dim {
                let trial: Vec<f64> = c.iter().map(|x| x + step * (rng.random::<f64>() - 0.5)).collect();
                if let Some((tc, ts)) = onto_level_set(obj, &trial, r) {
                    let v = obj.value(&ts);
                    if v < value {
                        value = v;
                        c = tc;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if value < best.0 {
            best = (value, c);
        }
    }
    Ok(ExponentResult { k: best.0, certified: false, minimizer: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::gell_mann_basis;

    #[test]
    fn zero_below_entropy() {
        let rho = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        let b = gell_mann_basis(2).unwrap();
        for r in [0.0, 0.2, 0.46] {
            assert_eq!(overflow_exponent_analytic(&rho, r, &b).unwrap().k, 0.0);
        }
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_eq!(overflow_exponent_analytic(&mixed, 1.0, &b).unwrap().k, 0.0);
        assert!(overflow_exponent_analytic(&rho, 1.5, &b).is_err());
    }

    #[test]
    fn radius_inverts_binary_entropy() {
        for r in [0.1, 0.5, 0.9, 0.999] {
            assert!((h2((1.0 + qubit_radius(r)) / 2.0) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn positive_and_monotone_above_entropy() {
        let rho = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        let b = gell_mann_basis(2).unwrap();
        let mut last = 0.0;
        for r in [0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
            let k = overflow_exponent_analytic(&rho, r, &b).unwrap().k;
            assert!(k > 0.0 && k >= last - 1e-12, "{r}: {k} < {last}");
            last = k;
        }
    }

    #[test]
    fn qutrit_is_flagged() {
        let rho = DensityMatrix::diagonal(&[0.8, 0.15, 0.05]).unwrap();
        let b = gell_mann_basis(3).unwrap();
        let res = overflow_exponent_analytic(&rho, 1.2, &b).unwrap();
        assert!(!res.certified && res.k > 0.0 && res.k.is_finite());
    }
}
