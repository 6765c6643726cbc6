//! RGB / YCbCr conversion (full-range BT.601, as used by JFIF) and chroma
//! resampling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An 8-bit RGB image, row-major, three samples per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    samples: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be non-zero, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if samples.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} samples for {width}x{height}, got {}",
                samples.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            samples,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> [u8; 3],
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                samples.extend_from_slice(&f(x, y));
            }
        }
        RgbImage::new(width, height, samples)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.samples[i], self.samples[i + 1], self.samples[i + 2]]
    }
}

/// A single 8-bit sample plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            samples: vec![0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    /// Sample at `(x, y)` with coordinates clamped into the plane.
    #[inline]
    pub fn get_clamped(&self, x: usize, y: usize) -> u8 {
        self.get(x.min(self.width - 1), y.min(self.height - 1))
    }

    /// Copy of the top-left `width` x `height` region.
    pub fn cropped(&self, width: usize, height: usize) -> Plane {
        let mut out = Plane::new(width, height);
        for y in 0..height {
            out.samples[y * width..(y + 1) * width]
                .copy_from_slice(&self.samples[y * self.width..y * self.width + width]);
        }
        out
    }

    /// Pads to `width` x `height` by replicating the last column and row.
    pub fn edge_padded(&self, width: usize, height: usize) -> Plane {
        let mut out = Plane::new(width, height);
        for y in 0..height {
            for x in 0..width {
                out.samples[y * width + x] = self.get_clamped(x, y);
            }
        }
        out
    }
}

/// Chroma subsampling mode for encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Subsampling {
    #[default]
    #[serde(rename = "4:4:4")]
    S444,
    #[serde(rename = "4:2:0")]
    S420,
}

impl Subsampling {
    /// Luma sampling factors (horizontal, vertical); chroma is always 1x1.
    pub fn luma_factors(self) -> (u8, u8) {
        match self {
            Subsampling::S444 => (1, 1),
            Subsampling::S420 => (2, 2),
        }
    }
}

impl fmt::Display for Subsampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subsampling::S444 => "4:4:4",
            Subsampling::S420 => "4:2:0",
        })
    }
}

impl FromStr for Subsampling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "444" | "4:4:4" => Ok(Subsampling::S444),
            "420" | "4:2:0" => Ok(Subsampling::S420),
            other => Err(format!(
                "unknown subsampling {other:?} (expected 444 or 420)"
            )),
        }
    }
}

/// Y, Cb, Cr planes. Chroma planes are full size at 4:4:4 and
/// `ceil(w/2) x ceil(h/2)` at 4:2:0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YcbcrImage {
    pub width: usize,
    pub height: usize,
    pub subsampling: Subsampling,
    pub planes: [Plane; 3],
}

/// Round half away from zero, then clamp to the 8-bit range.
#[inline]
pub(crate) fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[inline]
fn ycbcr_unrounded(r: f64, g: f64, b: f64) -> [f64; 3] {
    [
        0.299 * r + 0.587 * g + 0.114 * b,
        128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b,
        128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b,
    ]
}

/// Converts one RGB pixel to YCbCr.
pub fn rgb_pixel_to_ycbcr([r, g, b]: [u8; 3]) -> [u8; 3] {
    let [y, cb, cr] = ycbcr_unrounded(r as f64, g as f64, b as f64);
    [clamp_u8(y), clamp_u8(cb), clamp_u8(cr)]
}

/// Converts one YCbCr pixel to RGB.
pub fn ycbcr_pixel_to_rgb([y, cb, cr]: [u8; 3]) -> [u8; 3] {
    let y = y as f64;
    let cb = cb as f64 - 128.0;
    let cr = cr as f64 - 128.0;
    [
        clamp_u8(y + 1.402 * cr),
        clamp_u8(y - 0.344136 * cb - 0.714136 * cr),
        clamp_u8(y + 1.772 * cb),
    ]
}

/// Colour transform with optional 2x2 chroma averaging.
pub fn rgb_to_ycbcr(img: &RgbImage, subsampling: Subsampling) -> YcbcrImage {
    let (w, h) = (img.width as usize, img.height as usize);
    let mut luma = Plane::new(w, h);
    let mut cb_full = vec![0f64; w * h];
    let mut cr_full = vec![0f64; w * h];
    for (i, px) in img.samples.chunks_exact(3).enumerate() {
        let [y, cb, cr] = ycbcr_unrounded(px[0] as f64, px[1] as f64, px[2] as f64);
        luma.samples[i] = clamp_u8(y);
        cb_full[i] = cb;
        cr_full[i] = cr;
    }
    let (cb, cr) = match subsampling {
        Subsampling::S444 => {
            let to_plane = |v: &[f64]| Plane {
                width: w,
                height: h,
                samples: v.iter().map(|&s| clamp_u8(s)).collect(),
            };
            (to_plane(&cb_full), to_plane(&cr_full))
        }
        Subsampling::S420 => (average_2x2(&cb_full, w, h), average_2x2(&cr_full, w, h)),
    };
    YcbcrImage {
        width: w,
        height: h,
        subsampling,
        planes: [luma, cb, cr],
    }
}

// Averages each 2x2 cell; cells hanging off the right/bottom edge average the
// pixels that exist.
fn average_2x2(full: &[f64], w: usize, h: usize) -> Plane {
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    let mut out = Plane::new(cw, ch);
    for cy in 0..ch {
        for cx in 0..cw {
            let mut sum = 0.0;
            let mut n = 0.0;
            for y in (2 * cy)..(2 * cy + 2).min(h) {
                for x in (2 * cx)..(2 * cx + 2).min(w) {
                    sum += full[y * w + x];
                    n += 1.0;
                }
            }
            out.samples[cy * cw + cx] = clamp_u8(sum / n);
        }
    }
    out
}

/// Inverse colour transform; 4:2:0 chroma is upsampled with the triangle
/// filter used by [`upsample`].
pub fn ycbcr_to_rgb(img: &YcbcrImage) -> RgbImage {
    let (w, h) = (img.width, img.height);
    let (cb, cr) = match img.subsampling {
        Subsampling::S444 => (img.planes[1].clone(), img.planes[2].clone()),
        Subsampling::S420 => (
            upsample(&img.planes[1], 2, 2, w, h),
            upsample(&img.planes[2], 2, 2, w, h),
        ),
    };
    merge_ycbcr(&img.planes[0], &cb, &cr, w, h)
}

/// Interleaves three full-resolution planes into RGB, reading the top-left
/// `width` x `height` region of each.
pub(crate) fn merge_ycbcr(
    y: &Plane,
    cb: &Plane,
    cr: &Plane,
    width: usize,
    height: usize,
) -> RgbImage {
    let mut samples = Vec::with_capacity(width * height * 3);
    for row in 0..height {
        for col in 0..width {
            samples.extend_from_slice(&ycbcr_pixel_to_rgb([
                y.get(col, row),
                cb.get(col, row),
                cr.get(col, row),
            ]));
        }
    }
    RgbImage {
        width: width as u32,
        height: height as u32,
        samples,
    }
}

/// Upsamples `plane` by integer factors to cover `out_w` x `out_h`.
///
/// Factor 2 in either direction uses the triangle ("fancy") filter: each
/// output sample weights its nearest input sample 3/4 and the next nearest
/// 1/4, with edges replicated. Other factors replicate samples.
pub fn upsample(
    plane: &Plane,
    h_factor: usize,
    v_factor: usize,
    out_w: usize,
    out_h: usize,
) -> Plane {
    match (h_factor, v_factor) {
        (1, 1) => plane.edge_padded(out_w, out_h),
        (2, 1) => fancy_h2v1(plane, out_w, out_h),
        (1, 2) => fancy_h1v2(plane, out_w, out_h),
        (2, 2) => fancy_h2v2(plane, out_w, out_h),
        _ => replicate(plane, h_factor, v_factor, out_w, out_h),
    }
}

fn replicate(plane: &Plane, hf: usize, vf: usize, out_w: usize, out_h: usize) -> Plane {
    let mut out = Plane::new(out_w, out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            out.samples[y * out_w + x] = plane.get_clamped(x / hf, y / vf);
        }
    }
    out
}

fn fancy_h2v1(plane: &Plane, out_w: usize, out_h: usize) -> Plane {
    let mut out = Plane::new(out_w, out_h);
    let iw = plane.width;
    let mut row_out = vec![0u8; iw * 2];
    for y in 0..out_h {
        let row = &plane.samples[y.min(plane.height - 1) * iw..][..iw];
        for x in 0..iw {
            let this = row[x] as u32 * 3;
            let prev = row[x.saturating_sub(1)] as u32;
            let next = row[(x + 1).min(iw - 1)] as u32;
            row_out[2 * x] = ((this + prev + 1) >> 2) as u8;
            row_out[2 * x + 1] = ((this + next + 2) >> 2) as u8;
        }
        copy_row(&mut out, y, &row_out);
    }
    out
}

fn fancy_h1v2(plane: &Plane, out_w: usize, out_h: usize) -> Plane {
    let mut out = Plane::new(out_w, out_h);
    let iw = plane.width;
    let mut row_out = vec![0u8; iw];
    for y in 0..out_h {
        let (near, far, bias) = vertical_neighbours(plane.height, y);
        for x in 0..iw {
            let sum = plane.get(x, near) as u32 * 3 + plane.get(x, far) as u32;
            row_out[x] = ((sum + bias) >> 2) as u8;
        }
        copy_row(&mut out, y, &row_out);
    }
    out
}

fn fancy_h2v2(plane: &Plane, out_w: usize, out_h: usize) -> Plane {
    let mut out = Plane::new(out_w, out_h);
    let iw = plane.width;
    let mut colsum = vec![0u32; iw];
    let mut row_out = vec![0u8; iw * 2];
    for y in 0..out_h {
        let (near, far, _) = vertical_neighbours(plane.height, y);
        for (x, c) in colsum.iter_mut().enumerate() {
            *c = plane.get(x, near) as u32 * 3 + plane.get(x, far) as u32;
        }
        for x in 0..iw {
            let this = colsum[x] * 3;
            let prev = colsum[x.saturating_sub(1)];
            let next = colsum[(x + 1).min(iw - 1)];
            row_out[2 * x] = ((this + prev + 8) >> 4) as u8;
            row_out[2 * x + 1] = ((this + next + 7) >> 4) as u8;
        }
        copy_row(&mut out, y, &row_out);
    }
    out
}

// For output row `y` of a 2x vertical upsample: (nearest input row, next
// nearest input row, rounding bias).
fn vertical_neighbours(in_h: usize, y: usize) -> (usize, usize, u32) {
    let near = (y / 2).min(in_h - 1);
    if y % 2 == 0 {
        (near, near.saturating_sub(1), 1)
    } else {
        (near, (near + 1).min(in_h - 1), 2)
    }
}

fn copy_row(out: &mut Plane, y: usize, row: &[u8]) {
    let w = out.width;
    let dst = &mut out.samples[y * w..(y + 1) * w];
    for (x, d) in dst.iter_mut().enumerate() {
        *d = row[x.min(row.len() - 1)];
    }
}
