//! Wire format.
//!
//! ```text
//! bytes 0..4   magic "GQC1"
//! byte  4      version (1)
//! byte  5      d
//! bytes 6..14  n, u64 big-endian
//! bytes 14..16 B, u16 big-endian
//! then one MSB-first bitstream:
//!   (d^2 - 1) coefficients, B bits each, two's complement
//!   d model entries, B bits each, unsigned
//!   length register, w = ceil(log2(n ceil(log2 d) + 1)) bits
//!   payload, exactly `length register` bits
//! zero-padded to a byte boundary.
//! ```

use super::bits::{BitReader, BitWriter};
use super::{length_register_width, payload_cap, MAX_PRECISION, MIN_PRECISION};
use crate::error::{FormatError, Result};

pub const MAGIC: [u8; 4] = *b"GQC1";
pub const VERSION: u8 = 1;
const FIXED_HEADER: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlob {
    pub d: u8,
    pub n: u64,
    pub precision: u16,
    pub coefficients: Vec<i64>,
    pub model: Vec<u64>,
    /// Exact payload length in bits (the length register).
    pub payload_bits: u64,
    /// Payload bits packed MSB-first, zero-padded.
    pub payload: Vec<u8>,
}

fn sign_extend(raw: u64, width: u16) -> i64 {
    let shift = 64 - width as u32;
    ((raw << shift) as i64) >> shift
}

impl EncodedBlob {
    /// Header bits beyond the fixed 16 bytes: coefficients, model, length register.
    pub fn header_bits(&self) -> u64 {
        let d = self.d as u64;
        FIXED_HEADER as u64 * 8
            + (d * d - 1 + d) * self.precision as u64
            + length_register_width(self.n, self.d as usize) as u64
    }

    pub fn total_bits(&self) -> u64 {
        self.header_bits() + self.payload_bits
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let b = self.precision;
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&b) {
            return Err(FormatError::BadPrecision(b).into());
        }
        let mut out = Vec::with_capacity(FIXED_HEADER + self.payload.len() + 64);
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.d);
        out.extend_from_slice(&self.n.to_be_bytes());
        out.extend_from_slice(&b.to_be_bytes());

        let mut w = BitWriter::new();
        let limit = 1i64 << (b - 1);
        for &c in &self.coefficients {
            if !(-limit..limit).contains(&c) {
                return Err(FormatError::CoefficientRange(c, b).into());
            }
            w.write(c as u64, b as u32);
        }
        for &m in &self.model {
            w.write(m, b as u32);
        }
        let width = length_register_width(self.n, self.d as usize);
        w.write(self.payload_bits, width);
        w.append(&self.payload, self.payload_bits);
        out.extend(w.into_bytes());
        Ok(out)
    }

    /// Parses and frames a blob. Model validity is checked at decode time.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < FIXED_HEADER {
            if bytes.len() >= 4 && bytes[..4] != MAGIC {
                return Err(FormatError::BadMagic(bytes[..4].try_into().expect("four bytes")).into());
            }
            return Err(FormatError::Truncated { needed: FIXED_HEADER, have: bytes.len() }.into());
        }
        let magic: [u8; 4] = bytes[..4].try_into().expect("four bytes");
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic).into());
        }
        if bytes[4] != VERSION {
            return Err(FormatError::UnsupportedVersion(bytes[4]).into());
        }
        let d = bytes[5];
        if d < 2 {
            return Err(FormatError::BadDimension(d).into());
        }
        let n = u64::from_be_bytes(bytes[6..14].try_into().expect("eight bytes"));
        let b = u16::from_be_bytes(bytes[14..16].try_into().expect("two bytes"));
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&b) {
            return Err(FormatError::BadPrecision(b).into());
        }
        let body = &bytes[FIXED_HEADER..];
        let du = d as u64;
        let width = length_register_width(n, d as usize);
        let fixed_bits = (du * du - 1 + du) * b as u64 + width as u64;
        let available = body.len() as u64 * 8;
        if available < fixed_bits {
            return Err(FormatError::Truncated {
                needed: FIXED_HEADER + fixed_bits.div_ceil(8) as usize,
                have: bytes.len(),
            }
            .into());
        }
        let mut r = BitReader::new(body);
        let coefficients = (0..du * du - 1).map(|_| sign_extend(r.read(b as u32), b)).collect();
        let model = (0..du).map(|_| r.read(b as u32)).collect();
        let payload_bits = r.read(width);
        let cap = payload_cap(n, d as usize);
        if payload_bits > cap {
            return Err(FormatError::LengthOverflow { length: payload_bits, max: cap }.into());
        }
        let total_bits = fixed_bits + payload_bits;
        let needed = total_bits.div_ceil(8) as usize;
        if body.len() < needed {
            return Err(FormatError::Truncated { needed: FIXED_HEADER + needed, have: bytes.len() }.into());
        }
        if body.len() > needed {
            return Err(FormatError::TrailingBytes(body.len() - needed).into());
        }
        let mut payload = BitWriter::new();
        for _ in 0..payload_bits {
            payload.push(r.bit());
        }
        while r.position() < needed as u64 * 8 {
            if r.bit() {
                return Err(FormatError::NonzeroPadding.into());
            }
        }
        Ok(Self { d, n, precision: b, coefficients, model, payload_bits, payload: payload.into_bytes() })
    }
}
