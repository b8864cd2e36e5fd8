use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// MSB-first bit sink.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn write_bit(&mut self, bit: bool) {
        let off = (self.len % 8) as u8;
        if off == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> off;
        }
        self.len += 1;
    }

    pub fn write_u64(&mut self, value: u64, width: u32) {
        debug_assert!(width == 64 || value >> width == 0, "value wider than field");
        for i in (0..width).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    pub fn write_big(&mut self, value: &BigUint, width: u64) {
        debug_assert!(value.bits() <= width, "value wider than field");
        for i in (0..width).rev() {
            self.write_bit(value.bit(i));
        }
    }

    pub fn append(&mut self, other: &BitWriter) {
        let mut r = BitReader::new(&other.bytes, other.len);
        for _ in 0..other.len {
            self.write_bit(r.read_bit().unwrap());
        }
    }

    /// Bytes with zero padding in the final partial byte.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }
}

/// MSB-first bit source limited to `limit` bits.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    limit: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], limit: u64) -> Self {
        let limit = limit.min(bytes.len() as u64 * 8);
        BitReader { bytes, pos: 0, limit }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.pos
    }

    fn bit_at(&self, i: u64) -> bool {
        i < self.limit && (self.bytes[(i / 8) as usize] >> (7 - (i % 8))) & 1 == 1
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.limit {
            return Err(Error::MalformedStream("payload ended early".into()));
        }
        let b = self.bit_at(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn read_u64(&mut self, width: u32) -> Result<u64> {
        if self.remaining() < width as u64 {
            return Err(Error::MalformedStream("payload ended early".into()));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn read_big(&mut self, width: u64) -> Result<BigUint> {
        if self.remaining() < width {
            return Err(Error::MalformedStream("payload ended early".into()));
        }
        let v = self.peek_big(width);
        self.pos += width;
        Ok(v)
    }

    /// Next `width` bits without consuming them; bits past the end read as zero.
    pub fn peek_big(&self, width: u64) -> BigUint {
        let mut bytes = Vec::with_capacity(width.div_ceil(8) as usize);
        let mut acc = 0u8;
        let pad = (8 - width % 8) % 8;
        for i in 0..(width + pad) {
            let bit = i >= pad && self.bit_at(self.pos + i - pad);
            acc = (acc << 1) | u8::from(bit);
            if i % 8 == 7 {
                bytes.push(acc);
                acc = 0;
            }
        }
        BigUint::from_bytes_be(&bytes)
    }

    pub fn skip(&mut self, width: u64) -> Result<()> {
        if self.remaining() < width {
            return Err(Error::MalformedStream("payload ended early".into()));
        }
        self.pos += width;
        Ok(())
    }
}

/// Elias gamma code for m ≥ 1.
pub fn elias_gamma_write(w: &mut BitWriter, m: u64) {
    assert!(m >= 1, "Elias gamma needs a positive integer");
    let nbits = 64 - m.leading_zeros();
    for _ in 0..nbits - 1 {
        w.write_bit(false);
    }
    w.write_u64(m, nbits);
}

pub fn elias_gamma_read(r: &mut BitReader<'_>) -> Result<u64> {
    let mut zeros = 0u32;
    while !r.read_bit()? {
        zeros += 1;
        if zeros > 63 {
            return Err(Error::MalformedStream("Elias gamma prefix too long".into()));
        }
    }
    let rest = r.read_u64(zeros)?;
    Ok((1u64 << zeros) | rest)
}

pub fn elias_gamma_len(m: u64) -> u64 {
    2 * (63 - m.leading_zeros() as u64) + 1
}

/// Prefix-free bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword {
    len: u64,
    value: BigUint,
}

impl Codeword {
    pub fn new(value: BigUint, len: u64) -> Self {
        assert!(value.bits() <= len, "codeword value wider than its length");
        Codeword { len, value }
    }

    pub fn from_str_bits(s: &str) -> Self {
        let mut v = BigUint::zero();
        for c in s.chars() {
            v <<= 1;
            if c == '1' {
                v += BigUint::one();
            }
        }
        Codeword { len: s.len() as u64, value: v }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn write(&self, w: &mut BitWriter) {
        w.write_big(&self.value, self.len);
    }

    pub fn is_prefix_of(&self, other: &Codeword) -> bool {
        self.len <= other.len && (&other.value >> (other.len - self.len) as usize) == self.value
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).rev().map(|i| if self.value.bit(i) { '1' } else { '0' }).collect()
    }
}
