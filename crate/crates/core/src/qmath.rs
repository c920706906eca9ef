//! Dense Hermitian linear algebra and quantum-information functionals.
//!
//! Everything here works on small dense `d x d` complex matrices (`d` up to a
//! few dozen). Entropies are measured in bits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const KERNEL_EIGENVALUE: f64 = 1e-12;
const KERNEL_WEIGHT: f64 = 1e-10;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Copies the upper triangle onto the lower one so the result is Hermitian bit for bit.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    let d = m.nrows();
    let mut out = m.clone();
    for i in 0..d {
        out[(i, i)] = real(m[(i, i)].re);
        for j in (i + 1)..d {
            out[(j, i)] = out[(i, j)].conj();
        }
    }
    out
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Hilbert-Schmidt inner product `tr(A^H B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Frobenius (Schatten-2) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A unit-trace positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates `m` and stores its Hermitian part (upper triangle wins).
    pub fn new(m: CMatrix) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.ncols() });
        }
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let defect = hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let matrix = hermitize(&m);
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = eig_hermitian(&matrix)?.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix })
    }

    /// Builds a state after renormalizing the trace, for matrices that are PSD
    /// up to roundoff but may have drifted in trace.
    pub fn from_psd_unnormalized(m: CMatrix) -> Result<Self> {
        let h = hermitize(&m);
        let tr = trace(&h).re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(h.map(|z| z / tr))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self { matrix: CMatrix::identity(d, d).map(|z| z / d as f64) })
    }

    pub fn pure(psi: &PureStateVector) -> Result<Self> {
        Self::new(psi.projector())
    }

    /// Diagonal state `diag(p)` in the computational basis.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let d = p.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &pi) in p.iter().enumerate() {
            m[(i, i)] = real(pi);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `<phi| rho |phi>`.
    pub fn expectation(&self, phi: &PureStateVector) -> f64 {
        let v = phi.amplitudes();
        let mv = &self.matrix * v;
        v.dotc(&mv).re
    }

    pub fn purity(&self) -> f64 {
        hs_inner(&self.matrix, &self.matrix).re
    }
}

/// A unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    amplitudes: DVector<C64>,
}

impl PureStateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes: amplitudes / real(norm) })
    }

    /// Computational basis vector `|i>` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = DVector::from_element(d, zero());
        v[i] = real(1.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// An orthonormal basis of traceless Hermitian matrices (`d^2 - 1` elements).
#[derive(Clone, Debug)]
pub struct TracelessBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl TracelessBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Generalized Gell-Mann matrices scaled to unit Hilbert-Schmidt norm.
///
/// Ordering: symmetric `(j, k)` pairs, antisymmetric pairs, then diagonal
/// elements. For `d = 2` this gives `X, Y, Z` divided by `sqrt(2)`.
pub fn gell_mann_basis(d: usize) -> Result<TracelessBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = real(s);
            m[(k, j)] = real(s);
            elements.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, -s);
            m[(k, j)] = C64::new(0.0, s);
            elements.push(m);
        }
    }
    for l in 1..d {
        let norm = (1.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = real(norm);
        }
        m[(l, l)] = real(-(l as f64) * norm);
        elements.push(m);
    }
    Ok(TracelessBasis { dim: d, elements })
}

/// Coefficients `c_k = tr(rho sigma_k)`.
pub fn bloch_decompose(rho: &DensityMatrix, basis: &TracelessBasis) -> Result<Vec<f64>> {
    if rho.dim() != basis.dim {
        return Err(Error::DimensionMismatch { expected: basis.dim, found: rho.dim() });
    }
    Ok(basis.elements.iter().map(|s| hs_inner(s, rho.matrix()).re).collect())
}

/// `I/d + sum_k c_k sigma_k`. Hermitian with unit trace, not necessarily PSD.
pub fn bloch_reconstruct(c: &[f64], d: usize, basis: &TracelessBasis) -> Result<CMatrix> {
    if basis.dim != d {
        return Err(Error::DimensionMismatch { expected: basis.dim, found: d });
    }
    if c.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: c.len() });
    }
    let mut m = CMatrix::identity(d, d).map(|z| z / d as f64);
    for (ck, s) in c.iter().zip(&basis.elements) {
        m += s.map(|z| z * *ck);
    }
    Ok(hermitize(&m))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<PureStateVector>,
}

impl SpectralDecomposition {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `sum_i f(lambda_i) |v_i><v_i|`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.eigenvalues.len();
        let mut m = CMatrix::zeros(d, d);
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m += v.projector().map(|z| z * f(*lam));
        }
        m
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|x| x)
    }
}

/// Rotates the first non-negligible component of `v` onto the positive real axis.
fn fix_phase(v: &mut DVector<C64>) {
    if let Some(pivot) = v.iter().copied().find(|z| z.norm() > 1e-10) {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lex_cmp(a: &DVector<C64>, b: &DVector<C64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord.is_ne() {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Diagonalizes a Hermitian matrix.
///
/// Eigenvalues come back sorted descending. Each eigenvector is phase-fixed;
/// eigenvalues within `1e-12` of each other are ordered by the
/// lexicographically larger phase-fixed eigenvector first.
pub fn eig_hermitian(m: &CMatrix) -> Result<SpectralDecomposition> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: m.ncols() });
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut pairs: Vec<(f64, DVector<C64>)> = (0..d)
        .map(|i| {
            let mut v: DVector<C64> = eig.eigenvectors.column(i).into_owned();
            let norm = v.norm();
            v /= real(norm);
            fix_phase(&mut v);
            (eig.eigenvalues[i], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && pairs[end - 1].0 - pairs[end].0 <= 1e-12 {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1));
        }
        start = end;
    }
    let (eigenvalues, eigenvectors) = pairs
        .into_iter()
        .map(|(l, v)| (l, PureStateVector { amplitudes: v }))
        .unzip();
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `S(rho) = -tr rho log2 rho`, clamped to `[0, log2 d]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let eig = eig_hermitian(rho.matrix()).expect("density matrices are Hermitian");
    let s = shannon_entropy(&eig.eigenvalues);
    s.clamp(0.0, (rho.dim() as f64).log2())
}

/// `S(rho || sigma)` in bits; `+inf` when `rho` has weight on the kernel of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let sig = eig_hermitian(sigma.matrix())?;
    let mut cross = 0.0;
    for (mu, w) in sig.eigenvalues.iter().zip(&sig.eigenvectors) {
        let weight = rho.expectation(w);
        if *mu < KERNEL_EIGENVALUE {
            if weight > KERNEL_WEIGHT {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross -= weight * mu.log2();
    }
    let rel = cross - shannon_entropy(&eig_hermitian(rho.matrix())?.eigenvalues);
    Ok(rel.max(0.0))
}

/// Trace norm `||rho - sigma||_1`, the sum of absolute eigenvalues of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let diff = rho.matrix() - sigma.matrix();
    Ok(eig_hermitian(&diff)?.eigenvalues.iter().map(|x| x.abs()).sum())
}

/// Hilbert-Schmidt distance `||rho - sigma||_2`.
pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(hs_norm(&(rho.matrix() - sigma.matrix())))
}

/// Largest deviation of the Gram matrix of `vectors` from the identity.
pub fn orthonormality_defect(vectors: &[PureStateVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - real(target)).norm());
        }
    }
    worst
}

/// Outcome distribution `<v_i|rho|v_i>` of measuring in an orthonormal basis.
pub fn measured_distribution(rho: &DensityMatrix, basis: &[PureStateVector]) -> Result<Vec<f64>> {
    if basis.len() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: basis.len() });
    }
    if let Some(v) = basis.iter().find(|v| v.dim() != rho.dim()) {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: v.dim() });
    }
    let defect = orthonormality_defect(basis);
    if defect > 1e-10 {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(basis.iter().map(|v| rho.expectation(v).max(0.0)).collect())
}

fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// Continuity bound on entropy: `|S(rho) - S(sigma)| <= fannes_bound(||rho - sigma||_1, d)`.
///
/// Audenaert's sharp form `T log2(d-1) + h(T)` with `T = t/2`, held at its
/// maximum `log2 d` once `T >= 1 - 1/d` so the bound stays monotone.
pub fn fannes_bound(t: f64, d: usize) -> Result<f64> {
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::OutOfRange { what: "trace distance", value: t });
    }
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let half = t / 2.0;
    let peak = 1.0 - 1.0 / d as f64;
    if half >= peak {
        return Ok((d as f64).log2());
    }
    Ok(half * ((d - 1) as f64).log2() + binary_entropy(half))
}

/// Hilbert-Schmidt random state: `G G^H / tr(G G^H)` for a complex Ginibre `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    DensityMatrix::from_psd_unnormalized(&g * g.adjoint())
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureStateVector {
    loop {
        let v = DVector::from_fn(d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        if let Ok(psi) = PureStateVector::normalized(v) {
            return psi;
        }
    }
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// JSON fixture form of a matrix: dimension plus row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let d = m.nrows();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self { dim: d, entries }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim * self.dim,
                found: self.entries.len(),
            });
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            C64::new(re, im)
        }))
    }
}

/// State description by Bloch coefficients in the Gell-Mann basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochJson {
    pub d: usize,
    pub bloch: Vec<f64>,
}

impl BlochJson {
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let basis = gell_mann_basis(rho.dim())?;
        Ok(Self { d: rho.dim(), bloch: bloch_decompose(rho, &basis)? })
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let basis = gell_mann_basis(self.d)?;
        DensityMatrix::new(bloch_reconstruct(&self.bloch, self.d, &basis)?)
    }
}
