//! Explicit tensor-product construction of the collective counting measurement.
//!
//! `M_k = sum_{|x| = k} (x)_i [x_i P + (1 - x_i)(I - P)]` with `P = |phi><phi|`,
//! built string by string. Cost is exponential in `l`, so this only serves as
//! an oracle for small blocks.

use crate::error::{Error, Result};
use crate::qmath::{CMatrix, DensityMatrix, PureStateVector};

/// Largest block for density-matrix enumeration (`4^l` entries per operator).
pub const DENSITY_CAP: usize = 8;

/// The `l + 1` operators `M_0 .. M_l` on `(C^d)^{(x) l}`.
pub fn collective_operators(phi: &PureStateVector, l: usize) -> Result<Vec<CMatrix>> {
    if l > DENSITY_CAP {
        return Err(Error::CapExceeded { requested: l, cap: DENSITY_CAP });
    }
    let d = phi.dim();
    let p = phi.projector();
    let q = CMatrix::identity(d, d) - &p;
    let dim = d.pow(l as u32);
    let mut ops = vec![CMatrix::zeros(dim, dim); l + 1];
    for x in 0u32..(1u32 << l) {
        let mut term = CMatrix::identity(1, 1);
        for i in 0..l {
            let factor = if (x >> i) & 1 == 1 { &p } else { &q };
            term = term.kronecker(factor);
        }
        ops[x.count_ones() as usize] += term;
    }
    Ok(ops)
}

/// `rho^{(x) l}` as an explicit matrix.
pub fn tensor_power(rho: &DensityMatrix, l: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..l {
        out = out.kronecker(rho.matrix());
    }
    out
}

/// `tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `Tr[M_k rho^{(x) l}]` for every `k`, by explicit enumeration.
pub fn brute_force_collective(rho: &DensityMatrix, phi: &PureStateVector, l: usize) -> Result<Vec<f64>> {
    if rho.dim() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: phi.dim() });
    }
    let ops = collective_operators(phi, l)?;
    let joint = tensor_power(rho, l);
    Ok(ops.iter().map(|m| trace_of_product(m, &joint)).collect())
}
