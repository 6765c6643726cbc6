//! Baseline sequential JFIF encoder with fixed Annex K Huffman tables.

use super::bitio::BitWriter;
use super::color::{rgb_to_ycbcr, RgbImage, Subsampling};
use super::dct::{forward_dct, SampleBlock};
use super::dpcm::dpcm_encode;
use super::huffman::{write_ac, write_dc, HuffmanEncoder, HuffmanSpec};
use super::quant::{quality_to_quant_tables, quantize, QuantTable};
use super::rle::rle_encode;
use super::stream::marker;
use super::zigzag::zigzag_unscan;
use crate::error::{Error, Result};
use crate::partial::{CoefficientPlane, CoefficientPlanes};

/// Encoded bytes together with the quantized planes that went into them.
#[derive(Debug, Clone)]
pub struct EncodedJpeg {
    pub bytes: Vec<u8>,
    pub planes: CoefficientPlanes,
}

pub fn encode_jpeg(img: &RgbImage, quality: i32, subsampling: Subsampling) -> Result<Vec<u8>> {
    encode_jpeg_with_planes(img, quality, subsampling).map(|e| e.bytes)
}

pub fn encode_jpeg_with_planes(
    img: &RgbImage,
    quality: i32,
    subsampling: Subsampling,
) -> Result<EncodedJpeg> {
    let (luma_q, chroma_q) = quality_to_quant_tables(quality)?;
    if img.width() > u16::MAX as u32 || img.height() > u16::MAX as u32 {
        return Err(Error::InvalidImage(format!(
            "{}x{} exceeds the 65535 pixel limit",
            img.width(),
            img.height()
        )));
    }
    let ycc = rgb_to_ycbcr(img, subsampling);
    let (hmax, vmax) = subsampling.luma_factors();
    let mcu_cols = ycc.width.div_ceil(8 * hmax as usize);
    let mcu_rows = ycc.height.div_ceil(8 * vmax as usize);

    let mut planes = Vec::with_capacity(3);
    for (ci, samples) in ycc.planes.iter().enumerate() {
        let (h, v, table, tid) = if ci == 0 {
            (hmax, vmax, &luma_q, 0)
        } else {
            (1, 1, &chroma_q, 1)
        };
        let grid = (mcu_cols * h as usize, mcu_rows * v as usize);
        let padded = samples.edge_padded(grid.0 * 8, grid.1 * 8);
        let mut plane = CoefficientPlane::zeroed(ci as u8 + 1, (h, v), tid, grid);
        let mut pixels = [0u8; 64];
        for row in 0..grid.1 {
            for col in 0..grid.0 {
                for i in 0..8 {
                    let start = (row * 8 + i) * padded.width + col * 8;
                    pixels[8 * i..8 * i + 8].copy_from_slice(&padded.samples[start..start + 8]);
                }
                let q = quantize(&forward_dct(&SampleBlock::from_pixels(&pixels)), table);
                *plane.block_mut(row, col) = zigzag_unscan(&q.0);
            }
        }
        planes.push(plane);
    }
    let planes = CoefficientPlanes {
        width: ycc.width,
        height: ycc.height,
        planes,
    };

    let mut out = Vec::with_capacity(1024);
    out.extend_from_slice(&[0xFF, marker::SOI]);
    write_segment(
        &mut out,
        marker::APP0,
        b"JFIF\0\x01\x01\x00\x00\x01\x00\x01\x00\x00",
    );
    write_dqt(&mut out, &[&luma_q, &chroma_q]);
    write_sof0(&mut out, &planes);
    let tables = [
        (0x00, HuffmanSpec::luma_dc()),
        (0x10, HuffmanSpec::luma_ac()),
        (0x01, HuffmanSpec::chroma_dc()),
        (0x11, HuffmanSpec::chroma_ac()),
    ];
    write_dht(&mut out, &tables);
    write_segment(
        &mut out,
        marker::SOS,
        &[3, 1, 0x00, 2, 0x11, 3, 0x11, 0, 63, 0],
    );
    out.extend(entropy_scan(&planes, (mcu_cols, mcu_rows), &tables)?);
    out.extend_from_slice(&[0xFF, marker::EOI]);
    Ok(EncodedJpeg { bytes: out, planes })
}

fn write_segment(out: &mut Vec<u8>, m: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, m]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn write_dqt(out: &mut Vec<u8>, tables: &[&QuantTable]) {
    let mut payload = Vec::with_capacity(65 * tables.len());
    for (id, t) in tables.iter().enumerate() {
        payload.push(id as u8);
        payload.extend(t.zigzag().iter().map(|&q| q as u8));
    }
    write_segment(out, marker::DQT, &payload);
}

fn write_sof0(out: &mut Vec<u8>, planes: &CoefficientPlanes) {
    let mut payload = vec![8];
    payload.extend_from_slice(&(planes.height as u16).to_be_bytes());
    payload.extend_from_slice(&(planes.width as u16).to_be_bytes());
    payload.push(planes.planes.len() as u8);
    for p in &planes.planes {
        payload.extend_from_slice(&[
            p.component_id,
            (p.h_sampling << 4) | p.v_sampling,
            p.quant_table_id,
        ]);
    }
    write_segment(out, marker::SOF0, &payload);
}

fn write_dht(out: &mut Vec<u8>, tables: &[(u8, HuffmanSpec)]) {
    let mut payload = Vec::new();
    for (class_id, spec) in tables {
        payload.push(*class_id);
        payload.extend_from_slice(&spec.counts);
        payload.extend_from_slice(&spec.values);
    }
    write_segment(out, marker::DHT, &payload);
}

// Blocks of each component in interleaved scan order.
fn scan_order(
    plane: &CoefficientPlane,
    (mcu_cols, mcu_rows): (usize, usize),
) -> Vec<(usize, usize)> {
    let (h, v) = (plane.h_sampling as usize, plane.v_sampling as usize);
    let mut order = Vec::with_capacity(plane.block_count());
    for my in 0..mcu_rows {
        for mx in 0..mcu_cols {
            for dy in 0..v {
                for dx in 0..h {
                    order.push((my * v + dy, mx * h + dx));
                }
            }
        }
    }
    order
}

fn entropy_scan(
    planes: &CoefficientPlanes,
    mcu_grid: (usize, usize),
    tables: &[(u8, HuffmanSpec); 4],
) -> Result<Vec<u8>> {
    let luma = (
        HuffmanEncoder::new(&tables[0].1)?,
        HuffmanEncoder::new(&tables[1].1)?,
    );
    let chroma = (
        HuffmanEncoder::new(&tables[2].1)?,
        HuffmanEncoder::new(&tables[3].1)?,
    );

    let orders: Vec<_> = planes
        .planes
        .iter()
        .map(|p| scan_order(p, mcu_grid))
        .collect();
    let diffs = planes
        .planes
        .iter()
        .zip(&orders)
        .map(|(p, order)| {
            let dcs: Vec<i32> = order.iter().map(|&(r, c)| p.block(r, c)[0]).collect();
            dpcm_encode(&dcs)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut w = BitWriter::new();
    let mut next = vec![0usize; planes.planes.len()];
    for _ in 0..mcu_grid.0 * mcu_grid.1 {
        for (ci, p) in planes.planes.iter().enumerate() {
            let (dc, ac) = if ci == 0 { &luma } else { &chroma };
            for _ in 0..(p.h_sampling as usize * p.v_sampling as usize) {
                let k = next[ci];
                let (r, c) = orders[ci][k];
                let zz = super::zigzag::zigzag_scan(p.block(r, c));
                let ac_values: [i32; 63] = zz[1..].try_into().expect("63 AC values");
                write_dc(&mut w, diffs[ci].diffs()[k], dc)?;
                write_ac(&mut w, &rle_encode(&ac_values), ac)?;
                next[ci] += 1;
            }
        }
    }
    Ok(w.finish())
}
