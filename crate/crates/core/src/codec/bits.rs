//! MSB-first bit packing.

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte just ensured") |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    pub fn append(&mut self, bytes: &[u8], bits: u64) {
        for i in 0..bits {
            self.push(bytes[(i / 8) as usize] & (0x80 >> (i % 8)) != 0);
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.len
    }

    /// Packed bytes, zero-padded to a byte boundary.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn remaining(&self) -> u64 {
        (self.bytes.len() as u64 * 8).saturating_sub(self.pos)
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Next bit, or `false` past the end.
    pub fn bit(&mut self) -> bool {
        let byte = self.bytes.get((self.pos / 8) as usize).copied().unwrap_or(0);
        let bit = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        bit
    }

    pub fn read(&mut self, width: u32) -> u64 {
        (0..width).fold(0u64, |acc, _| (acc << 1) | self.bit() as u64)
    }
}
