//! 8x8 type-II DCT and its inverse, evaluated as separable matrix products
//! in double precision.
//!
//! Coefficient `(i, j)` is stored at index `8 * i + j`, with `i` the
//! vertical frequency and `j` the horizontal one. Samples use the same
//! row-major layout.

use std::sync::LazyLock;

/// 64 level-shifted samples in `[-128, 127]`, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleBlock([i16; 64]);

impl SampleBlock {
    /// Returns `None` if any value lies outside `[-128, 127]`.
    pub fn new(values: [i16; 64]) -> Option<Self> {
        values
            .iter()
            .all(|v| (-128..=127).contains(v))
            .then_some(SampleBlock(values))
    }

    /// Level-shifts 8-bit pixels by subtracting 128.
    pub fn from_pixels(pixels: &[u8; 64]) -> Self {
        SampleBlock(pixels.map(|p| p as i16 - 128))
    }

    /// Undoes the level shift.
    pub fn to_pixels(&self) -> [u8; 64] {
        self.0.map(|v| (v + 128) as u8)
    }

    pub fn values(&self) -> &[i16; 64] {
        &self.0
    }
}

/// 64 real DCT coefficients, row-major by (vertical, horizontal) frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DctBlock(pub [f64; 64]);

impl DctBlock {
    pub fn zero() -> Self {
        DctBlock([0.0; 64])
    }

    pub fn dc(&self) -> f64 {
        self.0[0]
    }
}

// BASIS[u][x] = c(u)/2 * cos((2x + 1) u pi / 16), c(0) = 1/sqrt(2), else 1.
static BASIS: LazyLock<[[f64; 8]; 8]> = LazyLock::new(|| {
    let mut m = [[0.0; 8]; 8];
    for (u, row) in m.iter_mut().enumerate() {
        let scale = if u == 0 {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            1.0
        };
        for (x, v) in row.iter_mut().enumerate() {
            *v = 0.5 * scale * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    m
});

/// Forward 2-D DCT of a level-shifted block.
///
/// `D(i, j) = c(i) c(j) / 4 * sum_{x,y=0..7} p(x, y) cos((2x+1) i pi/16) cos((2y+1) j pi/16)`.
/// A constant block of value `v` has `D(0, 0) = 8v` and no AC energy.
pub fn forward_dct(block: &SampleBlock) -> DctBlock {
    let basis = &*BASIS;
    // tmp = B * P  (transform columns)
    let mut tmp = [0.0f64; 64];
    for u in 0..8 {
        for y in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                acc += basis[u][x] * block.0[8 * x + y] as f64;
            }
            tmp[8 * u + y] = acc;
        }
    }
    // D = tmp * B^T  (transform rows)
    let mut out = [0.0f64; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for y in 0..8 {
                acc += tmp[8 * u + y] * basis[v][y];
            }
            out[8 * u + v] = acc;
        }
    }
    DctBlock(out)
}

/// Inverse 2-D DCT, rounded half away from zero and clamped to `[-128, 127]`.
pub fn inverse_dct(block: &DctBlock) -> SampleBlock {
    let real = inverse_dct_real(block);
    SampleBlock(real.map(|v| v.round().clamp(-128.0, 127.0) as i16))
}

/// Inverse 2-D DCT without rounding.
pub fn inverse_dct_real(block: &DctBlock) -> [f64; 64] {
    let basis = &*BASIS;
    // tmp = B^T * D
    let mut tmp = [0.0f64; 64];
    for x in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for u in 0..8 {
                acc += basis[u][x] * block.0[8 * u + v];
            }
            tmp[8 * x + v] = acc;
        }
    }
    // P = tmp * B
    let mut out = [0.0f64; 64];
    for x in 0..8 {
        for y in 0..8 {
            let mut acc = 0.0;
            for v in 0..8 {
                acc += tmp[8 * x + v] * basis[v][y];
            }
            out[8 * x + y] = acc;
        }
    }
    out
}
