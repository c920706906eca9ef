//! Bitwise integer arithmetic coder with carry-free pending-bit handling.
//!
//! Code values are 64 bits wide. After every renormalization the interval
//! width `high - low + 1` exceeds `2^62`, so any model with total `2^B`,
//! `B <= 62`, gives every symbol of frequency at least 1 a nonempty
//! sub-interval. Products are taken in `u128`.
//!
//! Renormalization (per symbol, repeated until none applies):
//! - `high < 1/2`: emit 0 followed by the pending 1s;
//! - `low >= 1/2`: emit 1 followed by the pending 0s, subtract `1/2`;
//! - `1/4 <= low` and `high < 3/4`: count one pending bit, subtract `1/4`.
//!
//! After each step `low <<= 1` and `high = (high << 1) | 1`.
//!
//! Termination emits one more pending bit and a selector (0 if
//! `low < 1/4`, else 1), so a decoder reading zeros past the end lands
//! inside the final interval.

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

const HALF: u64 = 1 << 63;
const QUARTER: u64 = 1 << 62;
const THREE_QUARTERS: u64 = HALF + QUARTER;

/// Cumulative frequency table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    cumulative: Vec<u64>,
}

impl FrequencyTable {
    /// `freqs` must be positive and sum to a power of two at most `2^62`.
    pub fn new(freqs: &[u64]) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(freqs.len() + 1);
        cumulative.push(0u64);
        let mut total: u128 = 0;
        for (i, &f) in freqs.iter().enumerate() {
            if f == 0 {
                return Err(crate::error::FormatError::ZeroModelEntry(i).into());
            }
            total += f as u128;
            if total > 1u128 << 62 {
                return Err(Error::Config("model total exceeds 2^62".into()));
            }
            cumulative.push(total as u64);
        }
        if freqs.is_empty() {
            return Err(Error::Config("empty model".into()));
        }
        Ok(Self { cumulative })
    }

    pub fn symbols(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn total(&self) -> u64 {
        *self.cumulative.last().expect("nonempty")
    }

    pub fn range(&self, symbol: usize) -> (u64, u64) {
        (self.cumulative[symbol], self.cumulative[symbol + 1])
    }

    fn find(&self, target: u64) -> usize {
        // Last index whose cumulative start is <= target.
        self.cumulative.partition_point(|&c| c <= target) - 1
    }
}

fn narrow(low: u64, high: u64, lo: u64, hi: u64, total: u64) -> (u64, u64) {
    let range = (high - low) as u128 + 1;
    let new_high = low as u128 + range * hi as u128 / total as u128 - 1;
    let new_low = low as u128 + range * lo as u128 / total as u128;
    (new_low as u64, new_high as u64)
}

#[derive(Debug)]
pub struct Encoder {
    low: u64,
    high: u64,
    pending: u64,
    out: BitWriter,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Self { low: 0, high: u64::MAX, pending: 0, out: BitWriter::new() }
    }

    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    /// Encodes one symbol; returns the realized code length `log2(old width / new width)`.
    pub fn encode(&mut self, symbol: usize, table: &FrequencyTable) -> Result<f64> {
        if symbol >= table.symbols() {
            return Err(Error::SymbolOutOfAlphabet { symbol: symbol as u32, alphabet: table.symbols() });
        }
        let (lo, hi) = table.range(symbol);
        let before = (self.high - self.low) as f64 + 1.0;
        let (low, high) = narrow(self.low, self.high, lo, hi, table.total());
        let bits = (before / ((high - low) as f64 + 1.0)).log2();
        self.low = low;
        self.high = high;
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
        Ok(bits)
    }

    /// Terminates the stream; returns the packed bytes and exact bit length.
    pub fn finish(mut self) -> (Vec<u8>, u64) {
        self.pending += 1;
        let selector = self.low >= QUARTER;
        self.emit(selector);
        let len = self.out.bit_len();
        (self.out.into_bytes(), len)
    }
}

#[derive(Debug)]
pub struct Decoder<'a> {
    low: u64,
    high: u64,
    value: u64,
    input: BitReader<'a>,
}

impl<'a> Decoder<'a> {
    /// Reads from `bytes`; bits past the end are taken as zero.
    pub fn new(bytes: &'a [u8]) -> Self {
        let mut input = BitReader::new(bytes);
        let value = input.read(64);
        Self { low: 0, high: u64::MAX, value, input }
    }

    pub fn decode(&mut self, table: &FrequencyTable) -> usize {
        let range = (self.high - self.low) as u128 + 1;
        let offset = (self.value - self.low) as u128;
        let target = (((offset + 1) * table.total() as u128 - 1) / range) as u64;
        let symbol = table.find(target);
        let (lo, hi) = table.range(symbol);
        let (low, high) = narrow(self.low, self.high, lo, hi, table.total());
        self.low = low;
        self.high = high;
        loop {
            if self.high < HALF {
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.input.bit() as u64;
        }
        symbol
    }
}

/// Encodes a whole sequence. Returns packed bytes, bit length, and per-symbol code lengths.
pub fn encode_symbols(symbols: &[u32], table: &FrequencyTable) -> Result<(Vec<u8>, u64, Vec<f64>)> {
    let mut enc = Encoder::new();
    let mut lengths = Vec::with_capacity(symbols.len());
    for &s in symbols {
        lengths.push(enc.encode(s as usize, table)?);
    }
    let (bytes, len) = enc.finish();
    Ok((bytes, len, lengths))
}

pub fn decode_symbols(bytes: &[u8], count: u64, table: &FrequencyTable) -> Vec<u32> {
    let mut dec = Decoder::new(bytes);
    (0..count).map(|_| dec.decode(table) as u32).collect()
}
