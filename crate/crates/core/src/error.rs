use thiserror::Error;

/// Errors produced anywhere in the simulator or codec.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0} (need d >= 2)")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("basis vectors are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid bin configuration: {0}")]
    InvalidBins(String),

    #[error("brute-force cap exceeded: {requested} copies (cap {cap})")]
    CapExceeded { requested: usize, cap: usize },

    #[error("{n} copies cannot fill {blocks} tomography blocks")]
    TooFewCopies { n: u64, blocks: u64 },

    #[error("feasibility problem is infeasible after {iterations} iterations (violation {violation:.3e})")]
    Infeasible { iterations: usize, violation: f64 },

    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfAlphabet { symbol: u32, alphabet: usize },

    #[error("blob format error: {0}")]
    Format(#[from] FormatError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Framing failures when parsing an encoded blob.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported precision {0}")]
    BadPrecision(u16),
    #[error("blob truncated: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("length register {length} exceeds maximum payload {max}")]
    LengthOverflow { length: u64, max: u64 },
    #[error("model entry {0} is zero")]
    ZeroModelEntry(usize),
    #[error("model total {total} differs from 2^{precision}")]
    ModelTotal { total: u128, precision: u16 },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("padding bits after payload are not zero")]
    NonzeroPadding,
    #[error("unsupported dimension {0}")]
    BadDimension(u8),
    #[error("coefficient {0} outside the signed {1}-bit range")]
    CoefficientRange(i64, u16),
}

pub type Result<T> = std::result::Result<T, Error>;
