//! Full baseline decode: the partial-decode stages followed by the inverse
//! DCT, chroma upsampling and the colour transform.

use super::color::{merge_ycbcr, upsample, Plane, RgbImage};
use super::dct::{inverse_dct, DctBlock};
use crate::error::{Error, Result};
use crate::partial::{partial_decode_into, CoefficientPlanes, CoefficientState, DecodeStats};

pub fn decode_jpeg(bytes: &[u8]) -> Result<RgbImage> {
    decode_jpeg_with_stats(bytes).map(|(img, _)| img)
}

pub fn decode_jpeg_with_stats(bytes: &[u8]) -> Result<(RgbImage, DecodeStats)> {
    let mut stats = DecodeStats::default();
    let planes = partial_decode_into(bytes, &mut stats)?;
    let samples = reconstruct_counted(&planes, &mut stats)?;
    let img = assemble_rgb(&planes, &samples)?;
    Ok((img, stats))
}

/// Runs the inverse DCT over every block of every dequantized plane,
/// returning one sample plane per component at its padded block-grid size.
pub fn reconstruct_samples(planes: &CoefficientPlanes) -> Result<Vec<Plane>> {
    reconstruct_counted(planes, &mut DecodeStats::default())
}

fn reconstruct_counted(planes: &CoefficientPlanes, stats: &mut DecodeStats) -> Result<Vec<Plane>> {
    planes
        .planes
        .iter()
        .map(|plane| {
            if plane.state() != CoefficientState::Dequantized {
                return Err(Error::WrongPlaneState {
                    expected: "dequantized",
                    found: "quantized",
                });
            }
            let (w, h) = plane.padded_size();
            let mut out = Plane::new(w, h);
            for row in 0..plane.blocks_high {
                for col in 0..plane.blocks_wide {
                    let coeffs = DctBlock(plane.block(row, col).map(f64::from));
                    let pixels = inverse_dct(&coeffs).to_pixels();
                    stats.idct_blocks += 1;
                    for (i, line) in pixels.chunks_exact(8).enumerate() {
                        let start = (row * 8 + i) * w + col * 8;
                        out.samples[start..start + 8].copy_from_slice(line);
                    }
                }
            }
            Ok(out)
        })
        .collect()
}

/// Crops each sample plane to its component size and upsamples it to the
/// full image size.
pub fn upsample_components(planes: &CoefficientPlanes, samples: &[Plane]) -> Result<Vec<Plane>> {
    if samples.len() != planes.planes.len() {
        return Err(Error::GeometryMismatch(format!(
            "{} sample planes for {} components",
            samples.len(),
            planes.planes.len()
        )));
    }
    let (w, h) = (planes.width, planes.height);
    let (max_h, max_v) = (planes.max_h(), planes.max_v());
    Ok(samples
        .iter()
        .zip(&planes.planes)
        .enumerate()
        .map(|(i, (s, p))| {
            let (cw, ch) = planes.component_size(i);
            let hf = max_h / p.h_sampling as usize;
            let vf = max_v / p.v_sampling as usize;
            upsample(&s.cropped(cw, ch), hf, vf, w, h).cropped(w, h)
        })
        .collect())
}

/// Upsamples and converts to RGB. Single-component images become gray RGB.
pub fn assemble_rgb(planes: &CoefficientPlanes, samples: &[Plane]) -> Result<RgbImage> {
    if !matches!(samples.len(), 1 | 3) {
        return Err(Error::UnsupportedComponents(samples.len()));
    }
    let (w, h) = (planes.width, planes.height);
    match upsample_components(planes, samples)?.as_slice() {
        [y] => RgbImage::new(
            w as u32,
            h as u32,
            y.samples.iter().flat_map(|&v| [v, v, v]).collect(),
        ),
        [y, cb, cr] => Ok(merge_ycbcr(y, cb, cr, w, h)),
        _ => unreachable!("component count checked above"),
    }
}
