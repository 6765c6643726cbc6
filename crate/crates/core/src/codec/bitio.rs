//! MSB-first bit packing for entropy-coded segments, with 0xFF byte stuffing.

use crate::error::{Error, Result};

pub(crate) struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter {
            out: Vec::new(),
            acc: 0,
            nbits: 0,
        }
    }

    /// Appends the low `len` bits of `bits` (`len <= 32`).
    #[inline]
    pub fn write(&mut self, bits: u32, len: u32) {
        debug_assert!(len <= 32);
        if len == 0 {
            return;
        }
        let mask = (1u64 << len) - 1;
        self.acc = (self.acc << len) | (bits as u64 & mask);
        self.nbits += len;
        while self.nbits >= 8 {
            self.nbits -= 8;
            let byte = (self.acc >> self.nbits) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
        }
        self.acc &= (1u64 << self.nbits) - 1;
    }

    /// Pads the final partial byte with 1-bits and returns the bytes.
    pub fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.write((1 << pad) - 1, pad);
        }
        self.out
    }
}

/// Reads bits from one stuffed entropy-coded segment.
///
/// Past the end of the data the reader supplies zero bits and remembers how
/// many it invented; consuming any of them is reported as a truncated scan.
pub(crate) struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    /// Offset of `data[0]` in the whole stream, for error reporting.
    base: usize,
    acc: u64,
    nbits: u32,
    padding: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8], base: usize) -> Self {
        BitReader {
            data,
            pos: 0,
            base,
            acc: 0,
            nbits: 0,
            padding: 0,
        }
    }

    /// Stream offset of the next unread byte.
    pub fn offset(&self) -> usize {
        self.base + self.pos
    }

    #[inline]
    fn refill(&mut self) -> Result<()> {
        while self.nbits <= 56 {
            let byte = if self.pos < self.data.len() {
                let b = self.data[self.pos];
                self.pos += 1;
                if b == 0xFF {
                    match self.data.get(self.pos) {
                        Some(0x00) => self.pos += 1,
                        _ => {
                            return Err(Error::CorruptEntropy {
                                offset: self.offset() - 1,
                            })
                        }
                    }
                }
                b
            } else {
                self.padding += 8;
                0
            };
            self.acc |= (byte as u64) << (56 - self.nbits);
            self.nbits += 8;
        }
        Ok(())
    }

    /// The next 16 bits, left-aligned in a u32's low half.
    #[inline]
    pub fn peek16(&mut self) -> Result<u32> {
        if self.nbits < 16 {
            self.refill()?;
        }
        Ok((self.acc >> 48) as u32)
    }

    #[inline]
    pub fn consume(&mut self, len: u32) -> Result<()> {
        debug_assert!(len <= self.nbits);
        self.acc <<= len;
        self.nbits -= len;
        if self.nbits < self.padding {
            return Err(Error::TruncatedScan {
                offset: self.base + self.data.len(),
            });
        }
        Ok(())
    }

    /// Reads `len <= 16` raw bits.
    #[inline]
    pub fn bits(&mut self, len: u32) -> Result<u32> {
        if len == 0 {
            return Ok(0);
        }
        let v = self.peek16()? >> (16 - len);
        self.consume(len)?;
        Ok(v)
    }
}

/// Magnitude category of a coefficient: the bit length of `|v|`.
#[inline]
pub(crate) fn category(v: i32) -> u32 {
    32 - v.unsigned_abs().leading_zeros()
}

/// The `category(v)` amplitude bits JPEG stores for `v`: `v` itself when
/// positive, `v - 1` (ones' complement) when negative.
#[inline]
pub(crate) fn amplitude_bits(v: i32) -> u32 {
    let size = category(v);
    let raw = if v < 0 { v - 1 } else { v } as u32;
    raw & ((1u32 << size) - 1)
}

/// Inverse of [`amplitude_bits`] (the EXTEND procedure).
#[inline]
pub(crate) fn extend(bits: u32, size: u32) -> i32 {
    if size == 0 {
        0
    } else if bits < (1 << (size - 1)) {
        bits as i32 - (1 << size) + 1
    } else {
        bits as i32
    }
}
