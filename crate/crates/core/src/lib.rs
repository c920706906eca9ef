//! Gentle tomography and universal compression of i.i.d. quantum sources.
//!
//! The crate simulates the full pipeline on a classical computer:
//!
//! - [`qmath`]: dense Hermitian algebra, entropies and distances.
//! - [`gentle`]: the binned collective counting measurement on one block of
//!   copies, its failure classes, and a brute-force circuit backend.
//! - [`tomography`]: block scheduling over the eigenvectors of a traceless
//!   basis and PSD feasibility estimation of the state.
//! - [`codec`]: regularized estimate, quantized header, bit-exact arithmetic
//!   coding of basis-diagonal symbol strings.
//! - [`harness`]: end-to-end trials, scaling sweeps, overflow exponents and
//!   reports.

pub mod codec;
pub mod error;
pub mod gentle;
pub mod harness;
pub mod qmath;
pub mod tomography;

pub use error::{Error, FormatError, Result};
pub use qmath::{DensityMatrix, PureStateVector, SpectralDecomposition, TracelessBasis};
