//! Run-length coding of the 63 zigzag-ordered AC coefficients.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RleSymbol {
    /// `zeros` zero coefficients (0..=15) followed by the nonzero `value`.
    Run { zeros: u8, value: i32 },
    /// Sixteen zero coefficients.
    Zrl,
    /// All remaining coefficients are zero.
    Eob,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RleSymbolSequence(pub Vec<RleSymbol>);

impl RleSymbolSequence {
    pub fn symbols(&self) -> &[RleSymbol] {
        &self.0
    }
}

/// Encodes AC coefficients as (zero-run, value) pairs.
///
/// Runs longer than 15 are split with ZRL; trailing zeros collapse into a
/// single EOB, which is omitted when the last coefficient is nonzero.
pub fn rle_encode(ac: &[i32; 63]) -> RleSymbolSequence {
    let mut symbols = Vec::new();
    let mut run = 0u8;
    for &v in ac {
        if v == 0 {
            run += 1;
            continue;
        }
        while run > 15 {
            symbols.push(RleSymbol::Zrl);
            run -= 16;
        }
        symbols.push(RleSymbol::Run {
            zeros: run,
            value: v,
        });
        run = 0;
    }
    if run > 0 {
        symbols.push(RleSymbol::Eob);
    }
    RleSymbolSequence(symbols)
}

/// Expands a symbol sequence back to 63 AC coefficients.
///
/// Rejects sequences that run past position 63, contain a zero-valued run
/// or a run longer than 15, continue after EOB, or stop short without EOB.
pub fn rle_decode(seq: &RleSymbolSequence) -> Result<[i32; 63]> {
    let mut out = [0i32; 63];
    let mut pos = 0usize;
    let mut ended = false;
    for sym in &seq.0 {
        if ended {
            return Err(Error::CorruptRunLength);
        }
        match *sym {
            RleSymbol::Run { zeros, value } => {
                if zeros > 15 || value == 0 {
                    return Err(Error::CorruptRunLength);
                }
                pos += zeros as usize;
                if pos >= 63 {
                    return Err(Error::CorruptRunLength);
                }
                out[pos] = value;
                pos += 1;
            }
            RleSymbol::Zrl => {
                pos += 16;
                if pos > 63 {
                    return Err(Error::CorruptRunLength);
                }
            }
            RleSymbol::Eob => ended = true,
        }
    }
    if !ended && pos != 63 {
        return Err(Error::CorruptRunLength);
    }
    Ok(out)
}
