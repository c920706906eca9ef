//! Compression of `rho^{(x) n}` in the eigenbasis of a regularized estimate.
//!
//! The estimate is regularized, quantized to fixed point, and its spectrum
//! becomes an integer model with total `2^B`. Symbols (indices into the
//! estimate's eigenbasis) are arithmetic-coded against that model. The blob
//! header carries the quantized state, so decoding needs nothing else.

pub mod arith;
pub mod bits;
pub mod blob;

pub use blob::EncodedBlob;

use crate::error::{Error, FormatError, Result};
use crate::qmath::{
    bloch_decompose, bloch_reconstruct, eig_hermitian, gell_mann_basis, measured_distribution, CMatrix, DensityMatrix,
    PureStateVector,
};
use arith::FrequencyTable;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;

pub const DEFAULT_PRECISION: u16 = 32;
pub const MIN_PRECISION: u16 = 8;
pub const MAX_PRECISION: u16 = 62;

/// `(1 - delta) rho + delta I/d`.
pub fn regularize(rho_tilde: &DensityMatrix, delta: f64) -> Result<DensityMatrix> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::OutOfRange { what: "delta", value: delta });
    }
    let d = rho_tilde.dim();
    let m = rho_tilde.matrix().map(|z| z * (1.0 - delta)) + CMatrix::identity(d, d).map(|z| z * (delta / d as f64));
    DensityMatrix::from_psd_unnormalized(m)
}

/// Default regularization `delta = n^{-s}`.
pub fn default_delta(n: u64, s: f64) -> f64 {
    (n as f64).powf(-s)
}

/// Quantized state description and coding model.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizedEstimate {
    pub d: usize,
    /// Regularization weight; unknown when rebuilt from a blob header.
    pub delta: Option<f64>,
    pub precision: u16,
    /// Bloch coefficients in units of `2^{-(B-2)}`.
    pub coefficients: Vec<i64>,
    /// Symbol frequencies, each at least 1, summing to `2^B`.
    pub model: Vec<u64>,
    /// Eigenvectors of the reconstructed matrix, in model order.
    pub basis: Vec<PureStateVector>,
}

fn check_precision(b: u16) -> Result<()> {
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&b) {
        return Err(FormatError::BadPrecision(b).into());
    }
    Ok(())
}

fn coefficient_scale(b: u16) -> f64 {
    2f64.powi(b as i32 - 2)
}

/// Apportions `lambda * 2^B` into integers, each at least 1, summing to `2^B`.
///
/// Floors first, then hands out (or takes back) single counts by largest
/// (smallest) remainder; ties go to the lower index.
pub fn apportion(lambda: &[f64], b: u16) -> Vec<u64> {
    let total = 1u64 << b;
    let scaled: Vec<f64> = lambda.iter().map(|&x| x.max(0.0) * total as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|&x| (x.floor() as u64).clamp(1, total)).collect();
    let remainders: Vec<f64> = scaled.iter().zip(&counts).map(|(x, &c)| x - c as f64).collect();
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&i, &j| remainders[j].total_cmp(&remainders[i]).then(i.cmp(&j)));
    let sum: u128 = counts.iter().map(|&c| c as u128).sum();
    let target = total as u128;
    if sum < target {
        let need = target - sum;
        let k = order.len() as u128;
        for (rank, &i) in order.iter().enumerate() {
            counts[i] += (need / k + u128::from((rank as u128) < need % k)) as u64;
        }
    } else {
        let mut excess = sum - target;
        for &i in order.iter().rev() {
            let take = excess.min(counts[i] as u128 - 1);
            counts[i] -= take as u64;
            excess -= take;
        }
        assert!(excess == 0, "model cannot hold {} symbols", lambda.len());
    }
    counts
}

impl RegularizedEstimate {
    /// Rebuilds the estimate from header fields: validates the model and
    /// recomputes the eigenbasis of the dequantized state.
    pub fn from_parts(d: usize, precision: u16, coefficients: Vec<i64>, model: Vec<u64>) -> Result<Self> {
        check_precision(precision)?;
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if coefficients.len() != d * d - 1 {
            return Err(Error::DimensionMismatch { expected: d * d - 1, found: coefficients.len() });
        }
        if model.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: model.len() });
        }
        if let Some(i) = model.iter().position(|&m| m == 0) {
            return Err(FormatError::ZeroModelEntry(i).into());
        }
        let total: u128 = model.iter().map(|&m| m as u128).sum();
        if total != 1u128 << precision {
            return Err(FormatError::ModelTotal { total, precision }.into());
        }
        let basis = eig_hermitian(&dequantize(d, precision, &coefficients)?)?.eigenvectors;
        Ok(Self { d, delta: None, precision, coefficients, model, basis })
    }

    /// Reconstructed `I/d + sum c_k sigma_k` from the quantized coefficients.
    pub fn matrix(&self) -> Result<CMatrix> {
        dequantize(self.d, self.precision, &self.coefficients)
    }

    /// `model_i / 2^B`.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = 2f64.powi(self.precision as i32);
        self.model.iter().map(|&m| m as f64 / total).collect()
    }

    pub fn frequency_table(&self) -> Result<FrequencyTable> {
        FrequencyTable::new(&self.model)
    }

    /// Ideal code length of symbol `i` in bits.
    pub fn code_length(&self, i: usize) -> f64 {
        self.precision as f64 - (self.model[i] as f64).log2()
    }

    /// `ceil(log2(2^B / min model)) + 2`.
    pub fn code_length_cap(&self) -> f64 {
        let min = *self.model.iter().min().expect("nonempty model");
        (self.precision as f64 - (min as f64).log2()).ceil() + 2.0
    }
}

fn dequantize(d: usize, precision: u16, coefficients: &[i64]) -> Result<CMatrix> {
    let scale = coefficient_scale(precision);
    let c: Vec<f64> = coefficients.iter().map(|&q| q as f64 / scale).collect();
    bloch_reconstruct(&c, d, &gell_mann_basis(d)?)
}

/// Quantizes `rho_delta` to `B`-bit fixed point and derives the coding model.
///
/// If rounding pushes the reconstructed spectrum below `delta/d`, the Bloch
/// vector is shrunk toward `I/d` and requantized until it is not.
pub fn quantize_estimate(rho_delta: &DensityMatrix, delta: f64, precision: u16) -> Result<RegularizedEstimate> {
    check_precision(precision)?;
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::OutOfRange { what: "delta", value: delta });
    }
    let d = rho_delta.dim();
    let basis = gell_mann_basis(d)?;
    let scale = coefficient_scale(precision);
    let limit = (1i64 << (precision - 1)) - 1;
    let mut coefficients: Vec<i64> = bloch_decompose(rho_delta, &basis)?
        .iter()
        .map(|c| ((c * scale).round() as i64).clamp(-limit, limit))
        .collect();
    let floor = delta / d as f64;
    let centre = 1.0 / d as f64;
    let mut eig = eig_hermitian(&dequantize(d, precision, &coefficients)?)?;
    let mut attempt = 0;
    while eig.min_eigenvalue() < floor - 1e-9 {
        // Eigenvalues move as 1/d + t (mu - 1/d) under scaling by t.
        let margin = (attempt + 1) as f64 * d as f64 / scale;
        let t = ((centre - floor - margin) / (centre - eig.min_eigenvalue())).clamp(0.0, 1.0);
        coefficients = coefficients.iter().map(|&q| (q as f64 * t).round() as i64).collect();
        eig = eig_hermitian(&dequantize(d, precision, &coefficients)?)?;
        attempt += 1;
    }
    let model = apportion(&eig.eigenvalues, precision);
    Ok(RegularizedEstimate {
        d,
        delta: Some(delta),
        precision,
        coefficients,
        model,
        basis: eig.eigenvectors,
    })
}

/// `q_i = <v_i|rho|v_i>` in the estimate's eigenbasis.
pub fn diagonal_distribution(rho_true: &DensityMatrix, est: &RegularizedEstimate) -> Result<Vec<f64>> {
    if rho_true.dim() != est.d {
        return Err(Error::DimensionMismatch { expected: est.d, found: rho_true.dim() });
    }
    let q = measured_distribution(rho_true, &est.basis)?;
    let clipped: Vec<f64> = q.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    Ok(clipped.iter().map(|x| x / total).collect())
}

/// Cross-entropy `-sum_i q_i log2(model_i / 2^B)` in bits per copy.
pub fn expected_rate(rho_true: &DensityMatrix, est: &RegularizedEstimate) -> Result<f64> {
    let q = diagonal_distribution(rho_true, est)?;
    Ok(q.iter().enumerate().map(|(i, qi)| qi * est.code_length(i)).sum())
}

/// Draws `n` i.i.d. symbols from `q`.
pub fn sample_symbols<R: Rng + ?Sized>(q: &[f64], n: u64, rng: &mut R) -> Result<Vec<u32>> {
    let dist = WeightedIndex::new(q).map_err(|e| Error::Config(format!("invalid symbol distribution: {e}")))?;
    Ok((0..n).map(|_| dist.sample(rng) as u32).collect())
}

/// `ceil(log2 d)`: bits per raw symbol.
pub fn raw_symbol_bits(d: usize) -> u32 {
    usize::BITS - (d - 1).leading_zeros()
}

/// Largest payload, `n ceil(log2 d)`.
pub fn payload_cap(n: u64, d: usize) -> u64 {
    n * raw_symbol_bits(d) as u64
}

/// Width of the length register, `ceil(log2(n ceil(log2 d) + 1))`.
pub fn length_register_width(n: u64, d: usize) -> u32 {
    let cap = payload_cap(n, d);
    u64::BITS - cap.leading_zeros()
}

/// Arithmetic-codes `symbols` against the estimate's model.
///
/// When the coded stream would reach `n ceil(log2 d)` bits, the symbols are
/// stored raw instead and the length register holds exactly that cap, which
/// the decoder reads as the raw-mode marker.
pub fn encode(symbols: &[u32], est: &RegularizedEstimate) -> Result<EncodedBlob> {
    Ok(encode_with_lengths(symbols, est)?.0)
}

/// [`encode`] plus the realized per-symbol code lengths of the arithmetic stream.
pub fn encode_with_lengths(symbols: &[u32], est: &RegularizedEstimate) -> Result<(EncodedBlob, Vec<f64>)> {
    if symbols.is_empty() {
        return Err(Error::Config("cannot encode an empty sequence".into()));
    }
    if est.d > u8::MAX as usize {
        return Err(Error::InvalidDimension(est.d));
    }
    let table = est.frequency_table()?;
    let n = symbols.len() as u64;
    let (bytes, len, lengths) = arith::encode_symbols(symbols, &table)?;
    let cap = payload_cap(n, est.d);
    let (payload, payload_bits) = if len >= cap {
        let mut w = bits::BitWriter::new();
        let width = raw_symbol_bits(est.d);
        for &s in symbols {
            w.write(s as u64, width);
        }
        (w.into_bytes(), cap)
    } else {
        (bytes, len)
    };
    let blob = EncodedBlob {
        d: est.d as u8,
        n,
        precision: est.precision,
        coefficients: est.coefficients.clone(),
        model: est.model.clone(),
        payload_bits,
        payload,
    };
    Ok((blob, lengths))
}

/// Recovers the estimate and the symbols from the blob alone.
pub fn decode_with_estimate(blob: &EncodedBlob) -> Result<(Vec<u32>, RegularizedEstimate)> {
    let d = blob.d as usize;
    let est = RegularizedEstimate::from_parts(d, blob.precision, blob.coefficients.clone(), blob.model.clone())?;
    let cap = payload_cap(blob.n, d);
    if blob.payload_bits > cap {
        return Err(FormatError::LengthOverflow { length: blob.payload_bits, max: cap }.into());
    }
    let have = blob.payload.len();
    let needed = blob.payload_bits.div_ceil(8) as usize;
    if have < needed {
        return Err(FormatError::Truncated { needed, have }.into());
    }
    let symbols = if blob.payload_bits == cap {
        let mut r = bits::BitReader::new(&blob.payload);
        let width = raw_symbol_bits(d);
        let symbols: Vec<u32> = (0..blob.n).map(|_| r.read(width) as u32).collect();
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= d) {
            return Err(Error::SymbolOutOfAlphabet { symbol: s, alphabet: d });
        }
        symbols
    } else {
        arith::decode_symbols(&blob.payload[..needed], blob.n, &est.frequency_table()?)
    };
    Ok((symbols, est))
}

pub fn decode(blob: &EncodedBlob) -> Result<Vec<u32>> {
    Ok(decode_with_estimate(blob)?.0)
}
