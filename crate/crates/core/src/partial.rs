//! Partial decoding: entropy decoding and dequantization only.
//!
//! The output of [`partial_decode`] is the coefficient-domain representation
//! of an image: one grid of 8x8 DCT blocks per component, never passed
//! through the inverse DCT. [`render_dct_image`] and [`to_channelized_tensor`]
//! turn those planes into classifier inputs.

use crate::codec::bitio::BitReader;
use crate::codec::huffman::{decode_block_into, HuffmanDecoder};
use crate::codec::quant::QuantTable;
use crate::codec::stream::{parse_stream, Frame, JpegStream, Scan};
use crate::codec::zigzag::{zigzag_scan, zigzag_unscan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientState {
    Quantized,
    Dequantized,
}

impl CoefficientState {
    fn name(self) -> &'static str {
        match self {
            CoefficientState::Quantized => "quantized",
            CoefficientState::Dequantized => "dequantized",
        }
    }
}

/// One component's grid of coefficient blocks, each in natural (row-major)
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientPlane {
    pub component_id: u8,
    pub h_sampling: u8,
    pub v_sampling: u8,
    pub quant_table_id: u8,
    pub blocks_wide: usize,
    pub blocks_high: usize,
    state: CoefficientState,
    blocks: Vec<[i32; 64]>,
}

impl CoefficientPlane {
    /// An all-zero quantized plane.
    pub fn zeroed(
        component_id: u8,
        (h_sampling, v_sampling): (u8, u8),
        quant_table_id: u8,
        (blocks_wide, blocks_high): (usize, usize),
    ) -> Self {
        CoefficientPlane {
            component_id,
            h_sampling,
            v_sampling,
            quant_table_id,
            blocks_wide,
            blocks_high,
            state: CoefficientState::Quantized,
            blocks: vec![[0; 64]; blocks_wide * blocks_high],
        }
    }

    pub fn state(&self) -> CoefficientState {
        self.state
    }

    pub fn blocks(&self) -> &[[i32; 64]] {
        &self.blocks
    }

    pub fn block(&self, row: usize, col: usize) -> &[i32; 64] {
        &self.blocks[row * self.blocks_wide + col]
    }

    pub fn block_mut(&mut self, row: usize, col: usize) -> &mut [i32; 64] {
        &mut self.blocks[row * self.blocks_wide + col]
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Width and height of the block grid in samples.
    pub fn padded_size(&self) -> (usize, usize) {
        (self.blocks_wide * 8, self.blocks_high * 8)
    }

    fn require(&self, state: CoefficientState) -> Result<()> {
        if self.state != state {
            return Err(Error::WrongPlaneState {
                expected: state.name(),
                found: self.state.name(),
            });
        }
        Ok(())
    }
}

/// All component planes of one image plus the frame geometry needed to
/// reconstruct pixels from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientPlanes {
    pub width: usize,
    pub height: usize,
    pub planes: Vec<CoefficientPlane>,
}

impl CoefficientPlanes {
    pub fn max_h(&self) -> usize {
        self.planes
            .iter()
            .map(|p| p.h_sampling as usize)
            .max()
            .unwrap_or(1)
    }

    pub fn max_v(&self) -> usize {
        self.planes
            .iter()
            .map(|p| p.v_sampling as usize)
            .max()
            .unwrap_or(1)
    }

    /// Unpadded sample dimensions of plane `i`.
    pub fn component_size(&self, i: usize) -> (usize, usize) {
        let p = &self.planes[i];
        (
            (self.width * p.h_sampling as usize).div_ceil(self.max_h()),
            (self.height * p.v_sampling as usize).div_ceil(self.max_v()),
        )
    }

    pub fn total_blocks(&self) -> usize {
        self.planes.iter().map(CoefficientPlane::block_count).sum()
    }
}

/// Work counters for one decode call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeStats {
    pub entropy_blocks: u64,
    pub dequantized_blocks: u64,
    pub idct_blocks: u64,
}

/// Entropy-decodes every scan into quantized coefficient planes.
pub fn extract_coefficients(stream: &JpegStream) -> Result<CoefficientPlanes> {
    extract_with_stats(stream, &mut DecodeStats::default())
}

pub(crate) fn extract_with_stats(
    stream: &JpegStream,
    stats: &mut DecodeStats,
) -> Result<CoefficientPlanes> {
    let frame = &stream.frame;
    let mut planes: Vec<CoefficientPlane> = frame
        .components
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            CoefficientPlane::zeroed(
                c.id,
                (c.h_sampling, c.v_sampling),
                c.quant_table,
                frame.padded_blocks(ci),
            )
        })
        .collect();
    for scan in &stream.scans {
        stats.entropy_blocks += decode_scan(stream, frame, scan, &mut planes)?;
    }
    Ok(CoefficientPlanes {
        width: frame.width as usize,
        height: frame.height as usize,
        planes,
    })
}

struct SegmentCursor<'s, 'a> {
    stream: &'s JpegStream<'a>,
    scan: &'s Scan,
    next: usize,
}

impl<'s, 'a> SegmentCursor<'s, 'a> {
    fn open(&mut self) -> Result<BitReader<'a>> {
        let range = self
            .scan
            .segments
            .get(self.next)
            .ok_or_else(|| Error::TruncatedScan {
                offset: self
                    .scan
                    .segments
                    .last()
                    .map_or(self.scan.offset, |r| r.end),
            })?;
        self.next += 1;
        Ok(BitReader::new(
            self.stream.segment_bytes(range),
            range.start,
        ))
    }
}

fn decode_scan<'a>(
    stream: &JpegStream<'a>,
    frame: &Frame,
    scan: &Scan,
    planes: &mut [CoefficientPlane],
) -> Result<u64> {
    let decoders = scan
        .components
        .iter()
        .map(|sc| {
            Ok((
                HuffmanDecoder::new(&sc.dc_table)?,
                HuffmanDecoder::new(&sc.ac_table)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut preds = vec![0i32; scan.components.len()];
    let mut cursor = SegmentCursor {
        stream,
        scan,
        next: 0,
    };
    let mut reader = cursor.open()?;
    let restart = scan.restart_interval.map(usize::from);
    let mut zz = [0i32; 64];
    let mut decoded = 0u64;

    // Restart handling shared by both unit orders.
    let mut begin_unit =
        |unit: usize, reader: &mut BitReader<'a>, preds: &mut [i32]| -> Result<()> {
            if let Some(ri) = restart {
                if unit > 0 && unit % ri == 0 {
                    *reader = cursor.open()?;
                    preds.fill(0);
                }
            }
            Ok(())
        };

    if scan.components.len() == 1 {
        let ci = scan.components[0].component;
        let (bw, bh) = frame.component_blocks(ci);
        let (dc, ac) = &decoders[0];
        for row in 0..bh {
            for col in 0..bw {
                begin_unit(row * bw + col, &mut reader, &mut preds)?;
                zz.fill(0);
                decode_block_into(&mut reader, &mut preds[0], dc, ac, &mut zz)?;
                *planes[ci].block_mut(row, col) = zigzag_unscan(&zz);
                decoded += 1;
            }
        }
    } else {
        let (mx, my) = frame.mcu_grid();
        for mcu_row in 0..my {
            for mcu_col in 0..mx {
                begin_unit(mcu_row * mx + mcu_col, &mut reader, &mut preds)?;
                for (si, sc) in scan.components.iter().enumerate() {
                    let comp = &frame.components[sc.component];
                    let (hs, vs) = (comp.h_sampling as usize, comp.v_sampling as usize);
                    let (dc, ac) = &decoders[si];
                    for v in 0..vs {
                        for h in 0..hs {
                            zz.fill(0);
                            decode_block_into(&mut reader, &mut preds[si], dc, ac, &mut zz)?;
                            *planes[sc.component].block_mut(mcu_row * vs + v, mcu_col * hs + h) =
                                zigzag_unscan(&zz);
                            decoded += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(decoded)
}

/// Multiplies every quantized coefficient by its divisor.
pub fn dequantize_planes(
    planes: &CoefficientPlanes,
    tables: &[Option<QuantTable>; 4],
) -> Result<CoefficientPlanes> {
    dequantize_with_stats(planes, tables, &mut DecodeStats::default())
}

pub(crate) fn dequantize_with_stats(
    planes: &CoefficientPlanes,
    tables: &[Option<QuantTable>; 4],
    stats: &mut DecodeStats,
) -> Result<CoefficientPlanes> {
    let mut out = planes.clone();
    for plane in &mut out.planes {
        plane.require(CoefficientState::Quantized)?;
        let table = tables
            .get(plane.quant_table_id as usize)
            .and_then(Option::as_ref)
            .ok_or(Error::MissingQuantTable(plane.quant_table_id))?;
        let divisors = table.natural();
        for block in &mut plane.blocks {
            for (c, &q) in block.iter_mut().zip(&divisors) {
                *c *= q as i32;
            }
        }
        stats.dequantized_blocks += plane.blocks.len() as u64;
        plane.state = CoefficientState::Dequantized;
    }
    Ok(out)
}

/// parse -> extract -> dequantize. Never runs an inverse DCT.
pub fn partial_decode(bytes: &[u8]) -> Result<CoefficientPlanes> {
    partial_decode_with_stats(bytes).map(|(planes, _)| planes)
}

pub fn partial_decode_with_stats(bytes: &[u8]) -> Result<(CoefficientPlanes, DecodeStats)> {
    let mut stats = DecodeStats::default();
    let planes = partial_decode_into(bytes, &mut stats)?;
    Ok((planes, stats))
}

pub(crate) fn partial_decode_into(
    bytes: &[u8],
    stats: &mut DecodeStats,
) -> Result<CoefficientPlanes> {
    let stream = parse_stream(bytes)?;
    let quantized = extract_with_stats(&stream, stats)?;
    dequantize_with_stats(&quantized, &stream.quant_tables, stats)
}

/// An 8-bit rendering of coefficient planes, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DctImageRendering {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub samples: Vec<u8>,
}

/// Maps a dequantized coefficient to a display sample. The DC coefficient of
/// a block with mean `m` is `8 (m - 128)`, so DC samples show block means.
#[inline]
pub fn coefficient_to_sample(c: i32) -> u8 {
    (((c as f64) / 8.0).round() + 128.0).clamp(0.0, 255.0) as u8
}

/// Writes each block's 64 coefficients into its own 8x8 spatial tile.
///
/// One plane gives a grayscale image; several planes with the same block
/// grid are stacked as channels.
pub fn render_dct_image(planes: &[CoefficientPlane]) -> Result<DctImageRendering> {
    let first = planes
        .first()
        .ok_or_else(|| Error::GeometryMismatch("no planes to render".into()))?;
    for p in planes {
        p.require(CoefficientState::Dequantized)?;
        if (p.blocks_wide, p.blocks_high) != (first.blocks_wide, first.blocks_high) {
            return Err(Error::GeometryMismatch(format!(
                "component {} grid {}x{} differs from {}x{}",
                p.component_id, p.blocks_wide, p.blocks_high, first.blocks_wide, first.blocks_high
            )));
        }
    }
    let (width, height) = first.padded_size();
    let channels = planes.len();
    let mut samples = vec![0u8; width * height * channels];
    for (ch, plane) in planes.iter().enumerate() {
        for row in 0..plane.blocks_high {
            for col in 0..plane.blocks_wide {
                let block = plane.block(row, col);
                for i in 0..8 {
                    for j in 0..8 {
                        let (y, x) = (row * 8 + i, col * 8 + j);
                        samples[(y * width + x) * channels + ch] =
                            coefficient_to_sample(block[8 * i + j]);
                    }
                }
            }
        }
    }
    Ok(DctImageRendering {
        width,
        height,
        channels,
        samples,
    })
}

/// Coefficients laid out `(blocks_high, blocks_wide, 64)` with the zigzag
/// index as the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelizedTensor {
    pub blocks_high: usize,
    pub blocks_wide: usize,
    pub values: Vec<f32>,
}

impl ChannelizedTensor {
    pub fn shape(&self) -> [usize; 3] {
        [self.blocks_high, self.blocks_wide, 64]
    }

    pub fn get(&self, row: usize, col: usize, k: usize) -> f32 {
        self.values[(row * self.blocks_wide + col) * 64 + k]
    }
}

pub fn to_channelized_tensor(plane: &CoefficientPlane) -> Result<ChannelizedTensor> {
    plane.require(CoefficientState::Dequantized)?;
    let mut values = Vec::with_capacity(plane.block_count() * 64);
    for block in plane.blocks() {
        values.extend(zigzag_scan(block).iter().map(|&c| c as f32));
    }
    Ok(ChannelizedTensor {
        blocks_high: plane.blocks_high,
        blocks_wide: plane.blocks_wide,
        values,
    })
}
