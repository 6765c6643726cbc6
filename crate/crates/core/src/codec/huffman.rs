//! Baseline Huffman coding of DC differences and AC run/size symbols.

use super::bitio::{amplitude_bits, category, extend, BitReader, BitWriter};
use super::dpcm::DpcmStream;
use super::rle::{RleSymbol, RleSymbolSequence};
use crate::error::{Error, Result};

/// A Huffman table as carried by a DHT segment: the number of codes of each
/// length 1..=16, then the symbols in code order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanSpec {
    pub counts: [u8; 16],
    pub values: Vec<u8>,
}

// T.81 Annex K.3 typical tables.
const LUMA_DC_COUNTS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const CHROMA_DC_COUNTS: [u8; 16] = [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
const DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

const LUMA_AC_COUNTS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D];
const LUMA_AC_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
];

const CHROMA_AC_COUNTS: [u8; 16] = [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77];
const CHROMA_AC_VALUES: [u8; 162] = [
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
    0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
    0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
    0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
    0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
    0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
    0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
];

impl HuffmanSpec {
    pub fn new(counts: [u8; 16], values: Vec<u8>) -> Result<Self> {
        let spec = HuffmanSpec { counts, values };
        spec.canonical_codes()?;
        Ok(spec)
    }

    pub fn luma_dc() -> Self {
        HuffmanSpec {
            counts: LUMA_DC_COUNTS,
            values: DC_VALUES.to_vec(),
        }
    }

    pub fn luma_ac() -> Self {
        HuffmanSpec {
            counts: LUMA_AC_COUNTS,
            values: LUMA_AC_VALUES.to_vec(),
        }
    }

    pub fn chroma_dc() -> Self {
        HuffmanSpec {
            counts: CHROMA_DC_COUNTS,
            values: DC_VALUES.to_vec(),
        }
    }

    pub fn chroma_ac() -> Self {
        HuffmanSpec {
            counts: CHROMA_AC_COUNTS,
            values: CHROMA_AC_VALUES.to_vec(),
        }
    }

    /// `(symbol, code, length)` for every entry, in table order.
    fn canonical_codes(&self) -> Result<Vec<(u8, u16, u8)>> {
        let total: usize = self.counts.iter().map(|&c| c as usize).sum();
        if total != self.values.len() {
            return Err(Error::InvalidHuffmanTable(format!(
                "counts sum to {total} but {} values given",
                self.values.len()
            )));
        }
        let mut out = Vec::with_capacity(total);
        let mut code = 0u32;
        let mut k = 0;
        for (i, &count) in self.counts.iter().enumerate() {
            let len = i as u32 + 1;
            for _ in 0..count {
                if code >= (1 << len) {
                    return Err(Error::InvalidHuffmanTable(format!(
                        "code space exhausted at length {len}"
                    )));
                }
                out.push((self.values[k], code as u16, len as u8));
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        Ok(out)
    }
}

/// Symbol to (code, length) map; length 0 marks an absent symbol.
#[derive(Debug, Clone)]
pub struct HuffmanEncoder {
    codes: [(u16, u8); 256],
}

impl HuffmanEncoder {
    pub fn new(spec: &HuffmanSpec) -> Result<Self> {
        let mut codes = [(0u16, 0u8); 256];
        for (sym, code, len) in spec.canonical_codes()? {
            codes[sym as usize] = (code, len);
        }
        Ok(HuffmanEncoder { codes })
    }

    #[inline]
    fn emit(&self, w: &mut BitWriter, symbol: u16) -> Result<()> {
        let (code, len) = self
            .codes
            .get(symbol as usize)
            .copied()
            .filter(|&(_, len)| len > 0)
            .ok_or(Error::UnencodableSymbol { symbol })?;
        w.write(code as u32, len as u32);
        Ok(())
    }
}

const FAST_BITS: u32 = 9;

/// Canonical-code decoder with a 9-bit lookahead table.
#[derive(Debug, Clone)]
pub struct HuffmanDecoder {
    // (length << 8) | symbol, or 0 when the code is longer than FAST_BITS.
    fast: Vec<u16>,
    max_code: [i32; 17],
    val_offset: [i32; 17],
    values: Vec<u8>,
}

impl HuffmanDecoder {
    pub fn new(spec: &HuffmanSpec) -> Result<Self> {
        let codes = spec.canonical_codes()?;
        let mut fast = vec![0u16; 1 << FAST_BITS];
        let mut max_code = [-1i32; 17];
        let mut val_offset = [0i32; 17];
        let mut k = 0usize;
        for len in 1..=16usize {
            let n = spec.counts[len - 1] as usize;
            if n == 0 {
                continue;
            }
            let first = codes[k].1 as i32;
            val_offset[len] = k as i32 - first;
            max_code[len] = codes[k + n - 1].1 as i32;
            k += n;
        }
        for &(sym, code, len) in &codes {
            let len = len as u32;
            if len <= FAST_BITS {
                let shift = FAST_BITS - len;
                let base = (code as usize) << shift;
                for slot in &mut fast[base..base + (1 << shift)] {
                    *slot = ((len as u16) << 8) | sym as u16;
                }
            }
        }
        Ok(HuffmanDecoder {
            fast,
            max_code,
            val_offset,
            values: spec.values.clone(),
        })
    }

    #[inline]
    pub(crate) fn decode(&self, r: &mut BitReader) -> Result<u8> {
        let peek = r.peek16()?;
        let entry = self.fast[(peek >> (16 - FAST_BITS)) as usize];
        if entry != 0 {
            r.consume((entry >> 8) as u32)?;
            return Ok(entry as u8);
        }
        for len in (FAST_BITS + 1)..=16 {
            let code = (peek >> (16 - len)) as i32;
            if code <= self.max_code[len as usize] {
                r.consume(len)?;
                return Ok(self.values[(self.val_offset[len as usize] + code) as usize]);
            }
        }
        Err(Error::CorruptEntropy { offset: r.offset() })
    }
}

/// Writes one DC difference: size category code, then amplitude bits.
#[inline]
pub(crate) fn write_dc(w: &mut BitWriter, diff: i32, dc: &HuffmanEncoder) -> Result<()> {
    let size = category(diff);
    if size > 15 {
        return Err(Error::UnencodableSymbol {
            symbol: size as u16,
        });
    }
    dc.emit(w, size as u16)?;
    w.write(amplitude_bits(diff), size);
    Ok(())
}

pub(crate) fn write_ac(
    w: &mut BitWriter,
    rle: &RleSymbolSequence,
    ac: &HuffmanEncoder,
) -> Result<()> {
    for sym in &rle.0 {
        match *sym {
            RleSymbol::Eob => ac.emit(w, 0x00)?,
            RleSymbol::Zrl => ac.emit(w, 0xF0)?,
            RleSymbol::Run { zeros, value } => {
                let size = category(value);
                if size > 15 || zeros > 15 {
                    return Err(Error::UnencodableSymbol {
                        symbol: ((zeros as u16) << 4) | size as u16,
                    });
                }
                ac.emit(w, ((zeros as u16) << 4) | size as u16)?;
                w.write(amplitude_bits(value), size);
            }
        }
    }
    Ok(())
}

#[inline]
fn read_dc_diff(r: &mut BitReader, dc: &HuffmanDecoder) -> Result<i32> {
    let size = dc.decode(r)? as u32;
    if size > 11 {
        return Err(Error::CorruptEntropy { offset: r.offset() });
    }
    Ok(extend(r.bits(size)?, size))
}

/// Decodes one block straight into zigzag-ordered coefficients, updating the
/// component's DC predictor.
#[inline]
pub(crate) fn decode_block_into(
    r: &mut BitReader,
    pred: &mut i32,
    dc: &HuffmanDecoder,
    ac: &HuffmanDecoder,
    out: &mut [i32; 64],
) -> Result<()> {
    *pred += read_dc_diff(r, dc)?;
    out[0] = *pred;
    let mut k = 1usize;
    while k < 64 {
        let sym = ac.decode(r)?;
        let run = (sym >> 4) as usize;
        let size = (sym & 0x0F) as u32;
        if size == 0 {
            match run {
                0 => break,
                15 => {
                    k += 16;
                    continue;
                }
                _ => return Err(Error::CorruptEntropy { offset: r.offset() }),
            }
        }
        k += run;
        if k > 63 {
            return Err(Error::CorruptEntropy { offset: r.offset() });
        }
        out[k] = extend(r.bits(size)?, size);
        k += 1;
    }
    if k > 64 {
        return Err(Error::CorruptEntropy { offset: r.offset() });
    }
    Ok(())
}

fn read_block_symbols(r: &mut BitReader, ac: &HuffmanDecoder) -> Result<RleSymbolSequence> {
    let mut symbols = Vec::new();
    let mut pos = 0usize;
    while pos < 63 {
        let sym = ac.decode(r)?;
        let zeros = sym >> 4;
        let size = (sym & 0x0F) as u32;
        if size == 0 {
            match zeros {
                0 => {
                    symbols.push(RleSymbol::Eob);
                    break;
                }
                15 => {
                    pos += 16;
                    if pos > 63 {
                        return Err(Error::CorruptEntropy { offset: r.offset() });
                    }
                    symbols.push(RleSymbol::Zrl);
                    continue;
                }
                _ => return Err(Error::CorruptEntropy { offset: r.offset() }),
            }
        }
        pos += zeros as usize;
        if pos >= 63 {
            return Err(Error::CorruptEntropy { offset: r.offset() });
        }
        symbols.push(RleSymbol::Run {
            zeros,
            value: extend(r.bits(size)?, size),
        });
        pos += 1;
    }
    Ok(RleSymbolSequence(symbols))
}

/// Huffman-codes one component's blocks into a stuffed, 1-padded byte
/// sequence. `blocks[i]` pairs with `dpcm.diffs()[i]`.
pub fn entropy_encode(
    dpcm: &DpcmStream,
    blocks: &[RleSymbolSequence],
    dc: &HuffmanSpec,
    ac: &HuffmanSpec,
) -> Result<Vec<u8>> {
    if dpcm.len() != blocks.len() {
        return Err(Error::LengthMismatch(format!(
            "{} DC differences for {} blocks",
            dpcm.len(),
            blocks.len()
        )));
    }
    let dc = HuffmanEncoder::new(dc)?;
    let ac = HuffmanEncoder::new(ac)?;
    let mut w = BitWriter::new();
    for (&diff, block) in dpcm.diffs().iter().zip(blocks) {
        write_dc(&mut w, diff, &dc)?;
        write_ac(&mut w, block, &ac)?;
    }
    Ok(w.finish())
}

/// Inverse of [`entropy_encode`] for `block_count` blocks.
pub fn entropy_decode(
    bytes: &[u8],
    block_count: usize,
    dc: &HuffmanSpec,
    ac: &HuffmanSpec,
) -> Result<(DpcmStream, Vec<RleSymbolSequence>)> {
    if block_count == 0 {
        return Err(Error::EmptyComponent);
    }
    let dc = HuffmanDecoder::new(dc)?;
    let ac = HuffmanDecoder::new(ac)?;
    let mut r = BitReader::new(bytes, 0);
    let mut diffs = Vec::with_capacity(block_count);
    let mut blocks = Vec::with_capacity(block_count);
    for _ in 0..block_count {
        diffs.push(read_dc_diff(&mut r, &dc)?);
        blocks.push(read_block_symbols(&mut r, &ac)?);
    }
    Ok((DpcmStream(diffs), blocks))
}
