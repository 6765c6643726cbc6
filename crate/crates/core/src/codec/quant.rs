//! Quantization tables, quantization, and the IJG quality scaling.

use super::dct::DctBlock;
use super::zigzag::{NATURAL_TO_ZIGZAG, ZIGZAG_TO_NATURAL};
use crate::error::{Error, Result};

/// Example luminance table from ITU-T T.81 Annex K, row-major.
pub const ANNEX_K_LUMA: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Example chrominance table from ITU-T T.81 Annex K, row-major.
pub const ANNEX_K_CHROMA: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// 64 divisors stored in zigzag order, as they appear in a DQT segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantTable {
    zigzag: [u16; 64],
}

impl QuantTable {
    pub fn from_zigzag(zigzag: [u16; 64]) -> Result<Self> {
        if let Some(k) = zigzag.iter().position(|&q| q == 0) {
            return Err(Error::InvalidQuantTable(format!(
                "zero divisor at zigzag {k}"
            )));
        }
        Ok(QuantTable { zigzag })
    }

    pub fn from_natural(natural: [u16; 64]) -> Result<Self> {
        QuantTable::from_zigzag(std::array::from_fn(|k| natural[ZIGZAG_TO_NATURAL[k]]))
    }

    pub fn zigzag(&self) -> &[u16; 64] {
        &self.zigzag
    }

    pub fn natural(&self) -> [u16; 64] {
        std::array::from_fn(|n| self.zigzag[NATURAL_TO_ZIGZAG[n]])
    }

    /// True when every divisor fits the 8-bit DQT precision.
    pub fn is_8bit(&self) -> bool {
        self.zigzag.iter().all(|&q| q <= 255)
    }
}

/// Quantized coefficients in zigzag order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizedBlock(pub [i32; 64]);

impl QuantizedBlock {
    pub fn dc(&self) -> i32 {
        self.0[0]
    }

    pub fn ac(&self) -> [i32; 63] {
        std::array::from_fn(|k| self.0[k + 1])
    }
}

/// `C = round(D / Q)` with ties away from zero, emitted in zigzag order.
pub fn quantize(block: &DctBlock, table: &QuantTable) -> QuantizedBlock {
    QuantizedBlock(std::array::from_fn(|k| {
        (block.0[ZIGZAG_TO_NATURAL[k]] / table.zigzag[k] as f64).round() as i32
    }))
}

/// `D' = C * Q`, back in natural order.
pub fn dequantize(block: &QuantizedBlock, table: &QuantTable) -> DctBlock {
    let mut out = DctBlock::zero();
    for k in 0..64 {
        out.0[ZIGZAG_TO_NATURAL[k]] = (block.0[k] * table.zigzag[k] as i32) as f64;
    }
    out
}

/// Scales the Annex K tables the way libjpeg's `jpeg_set_quality` does.
///
/// Returns `(luma, chroma)`.
pub fn quality_to_quant_tables(quality: i32) -> Result<(QuantTable, QuantTable)> {
    if !(1..=100).contains(&quality) {
        return Err(Error::InvalidQuality(quality));
    }
    let scale = if quality < 50 {
        5000 / quality
    } else {
        200 - 2 * quality
    };
    let scaled = |base: &[u16; 64]| {
        let natural = base.map(|b| ((b as i32 * scale + 50) / 100).clamp(1, 255) as u16);
        QuantTable::from_natural(natural).expect("divisors clamped to >= 1")
    };
    Ok((scaled(&ANNEX_K_LUMA), scaled(&ANNEX_K_CHROMA)))
}
