//! Marker-level parsing of baseline sequential JPEG streams.
//!
//! [`parse_stream`] resolves every table a scan refers to and locates the
//! entropy-coded data (split at restart markers) without decoding it.

use std::ops::Range;

use super::huffman::HuffmanSpec;
use super::quant::QuantTable;
use crate::error::{Error, Result};

pub mod marker {
    pub const SOF0: u8 = 0xC0;
    pub const SOF1: u8 = 0xC1;
    pub const DHT: u8 = 0xC4;
    pub const SOI: u8 = 0xD8;
    pub const EOI: u8 = 0xD9;
    pub const SOS: u8 = 0xDA;
    pub const DQT: u8 = 0xDB;
    pub const DNL: u8 = 0xDC;
    pub const DRI: u8 = 0xDD;
    pub const APP0: u8 = 0xE0;
    pub const COM: u8 = 0xFE;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameComponent {
    pub id: u8,
    pub h_sampling: u8,
    pub v_sampling: u8,
    pub quant_table: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub precision: u8,
    pub width: u16,
    pub height: u16,
    pub components: Vec<FrameComponent>,
}

impl Frame {
    pub fn max_h(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.h_sampling as usize)
            .max()
            .unwrap_or(1)
    }

    pub fn max_v(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.v_sampling as usize)
            .max()
            .unwrap_or(1)
    }

    /// MCU columns and rows of an interleaved scan.
    pub fn mcu_grid(&self) -> (usize, usize) {
        (
            (self.width as usize).div_ceil(8 * self.max_h()),
            (self.height as usize).div_ceil(8 * self.max_v()),
        )
    }

    /// Sample dimensions of component `ci` before padding.
    pub fn component_size(&self, ci: usize) -> (usize, usize) {
        let c = &self.components[ci];
        (
            (self.width as usize * c.h_sampling as usize).div_ceil(self.max_h()),
            (self.height as usize * c.v_sampling as usize).div_ceil(self.max_v()),
        )
    }

    /// Blocks actually coded for component `ci` in a non-interleaved scan.
    pub fn component_blocks(&self, ci: usize) -> (usize, usize) {
        let (w, h) = self.component_size(ci);
        (w.div_ceil(8), h.div_ceil(8))
    }

    /// Block grid of component `ci`, padded to whole MCUs when the frame has
    /// more than one component.
    pub fn padded_blocks(&self, ci: usize) -> (usize, usize) {
        if self.components.len() == 1 {
            return self.component_blocks(ci);
        }
        let (mx, my) = self.mcu_grid();
        let c = &self.components[ci];
        (mx * c.h_sampling as usize, my * c.v_sampling as usize)
    }
}

/// One scan component with its Huffman tables resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanComponent {
    /// Index into [`Frame::components`].
    pub component: usize,
    pub dc_table_id: u8,
    pub ac_table_id: u8,
    pub dc_table: HuffmanSpec,
    pub ac_table: HuffmanSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scan {
    /// Offset of the SOS marker.
    pub offset: usize,
    pub components: Vec<ScanComponent>,
    /// MCUs per restart interval in force for this scan.
    pub restart_interval: Option<u16>,
    /// Entropy-coded segments (still byte-stuffed), split at RST markers.
    pub segments: Vec<Range<usize>>,
}

/// A parsed stream. Entropy data is borrowed from the input.
#[derive(Debug, Clone)]
pub struct JpegStream<'a> {
    data: &'a [u8],
    /// Quantization tables by id, as in force when first used by a scan.
    pub quant_tables: [Option<QuantTable>; 4],
    pub dc_tables: [Option<HuffmanSpec>; 4],
    pub ac_tables: [Option<HuffmanSpec>; 4],
    pub frame: Frame,
    pub scans: Vec<Scan>,
    pub restart_interval: Option<u16>,
    /// Offset of the EOI marker.
    pub eoi_offset: usize,
}

impl<'a> JpegStream<'a> {
    pub fn data(&self) -> &'a [u8] {
        self.data
    }

    pub fn segment_bytes(&self, range: &Range<usize>) -> &'a [u8] {
        &self.data[range.clone()]
    }

    pub fn quant_table(&self, id: u8) -> Option<&QuantTable> {
        self.quant_tables.get(id as usize).and_then(Option::as_ref)
    }
}

struct Parser<'a> {
    data: &'a [u8],
    pos: usize,
    current_quant: [Option<QuantTable>; 4],
    latched_quant: [Option<Option<QuantTable>>; 4],
    dc_tables: [Option<HuffmanSpec>; 4],
    ac_tables: [Option<HuffmanSpec>; 4],
    frame: Option<Frame>,
    scans: Vec<Scan>,
    restart_interval: Option<u16>,
}

fn malformed(segment: &'static str, offset: usize, detail: impl Into<String>) -> Error {
    Error::Malformed {
        segment,
        offset,
        detail: detail.into(),
    }
}

/// Parses a baseline sequential JPEG stream.
pub fn parse_stream(data: &[u8]) -> Result<JpegStream<'_>> {
    if data.len() < 2 || data[0] != 0xFF || data[1] != marker::SOI {
        return Err(Error::MissingSoi);
    }
    let mut p = Parser {
        data,
        pos: 2,
        current_quant: Default::default(),
        latched_quant: Default::default(),
        dc_tables: Default::default(),
        ac_tables: Default::default(),
        frame: None,
        scans: Vec::new(),
        restart_interval: None,
    };
    let eoi_offset = p.run()?;
    let frame = p
        .frame
        .ok_or_else(|| malformed("EOI", eoi_offset, "no frame header before EOI"))?;
    if p.scans.is_empty() {
        return Err(malformed("EOI", eoi_offset, "no scan before EOI"));
    }
    for (ci, comp) in frame.components.iter().enumerate() {
        if !p
            .scans
            .iter()
            .any(|s| s.components.iter().any(|sc| sc.component == ci))
        {
            return Err(malformed(
                "EOI",
                eoi_offset,
                format!("component {} is not coded in any scan", comp.id),
            ));
        }
    }
    let quant_tables = std::array::from_fn(|i| {
        p.latched_quant[i]
            .clone()
            .unwrap_or_else(|| p.current_quant[i])
    });
    Ok(JpegStream {
        data,
        quant_tables,
        dc_tables: p.dc_tables,
        ac_tables: p.ac_tables,
        frame,
        scans: p.scans,
        restart_interval: p.restart_interval,
        eoi_offset,
    })
}

impl<'a> Parser<'a> {
    /// Walks markers until EOI and returns its offset.
    fn run(&mut self) -> Result<usize> {
        loop {
            if self.pos >= self.data.len() {
                return Err(Error::MissingEoi { offset: self.pos });
            }
            if self.data[self.pos] != 0xFF {
                return Err(malformed(
                    "marker",
                    self.pos,
                    format!("expected 0xFF, found 0x{:02X}", self.data[self.pos]),
                ));
            }
            while self.pos < self.data.len() && self.data[self.pos] == 0xFF {
                self.pos += 1;
            }
            if self.pos >= self.data.len() {
                return Err(Error::MissingEoi { offset: self.pos });
            }
            let code = self.data[self.pos];
            let at = self.pos - 1;
            self.pos += 1;
            match code {
                marker::EOI => return Ok(at),
                marker::SOI => return Err(malformed("SOI", at, "duplicate SOI")),
                // Stray restart markers and TEM carry no payload.
                0xD0..=0xD7 | 0x01 => {}
                marker::SOF0 | marker::SOF1 => {
                    let seg = self.segment(at)?;
                    self.frame_header(seg, at)?;
                }
                0xC2 | 0xC6 | 0xCA | 0xCE => {
                    return Err(Error::UnsupportedMode {
                        mode: "progressive",
                        offset: at,
                    })
                }
                0xC3 | 0xC7 | 0xCB | 0xCF => {
                    return Err(Error::UnsupportedMode {
                        mode: "lossless",
                        offset: at,
                    })
                }
                0xC5 | 0xDE | 0xDF => {
                    return Err(Error::UnsupportedMode {
                        mode: "hierarchical",
                        offset: at,
                    })
                }
                0xC9 | 0xCC | 0xCD => {
                    return Err(Error::UnsupportedMode {
                        mode: "arithmetic coding",
                        offset: at,
                    })
                }
                marker::DNL => {
                    return Err(Error::UnsupportedMode {
                        mode: "DNL-defined height",
                        offset: at,
                    })
                }
                marker::DHT => {
                    let seg = self.segment(at)?;
                    self.huffman_tables(seg, at)?;
                }
                marker::DQT => {
                    let seg = self.segment(at)?;
                    self.quant_tables(seg, at)?;
                }
                marker::DRI => {
                    let seg = self.segment(at)?;
                    if seg.len() != 2 {
                        return Err(malformed("DRI", at, format!("length {} != 2", seg.len())));
                    }
                    let ri = u16::from_be_bytes([seg[0], seg[1]]);
                    self.restart_interval = (ri > 0).then_some(ri);
                }
                marker::SOS => {
                    let seg = self.segment(at)?;
                    self.scan(seg, at)?;
                }
                0xE0..=0xEF | marker::COM => {
                    self.segment(at)?;
                }
                other => {
                    return Err(Error::UnknownMarker {
                        marker: other,
                        offset: at,
                    })
                }
            }
        }
    }

    /// Reads a length-prefixed segment payload and advances past it.
    fn segment(&mut self, at: usize) -> Result<&'a [u8]> {
        let data = self.data;
        if self.pos + 2 > data.len() {
            return Err(Error::UnexpectedEof { offset: data.len() });
        }
        let len = u16::from_be_bytes([data[self.pos], data[self.pos + 1]]) as usize;
        if len < 2 {
            return Err(malformed("marker", at, format!("segment length {len} < 2")));
        }
        let end = self.pos + len;
        if end > data.len() {
            return Err(Error::UnexpectedEof { offset: data.len() });
        }
        let payload = &data[self.pos + 2..end];
        self.pos = end;
        Ok(payload)
    }

    fn frame_header(&mut self, seg: &[u8], at: usize) -> Result<()> {
        if self.frame.is_some() {
            return Err(malformed("SOF", at, "second frame header"));
        }
        if seg.len() < 6 {
            return Err(malformed("SOF", at, "header too short"));
        }
        let precision = seg[0];
        if precision != 8 {
            return Err(Error::UnsupportedMode {
                mode: if precision == 12 {
                    "12-bit precision"
                } else {
                    "non-8-bit precision"
                },
                offset: at,
            });
        }
        let height = u16::from_be_bytes([seg[1], seg[2]]);
        let width = u16::from_be_bytes([seg[3], seg[4]]);
        if height == 0 {
            return Err(Error::UnsupportedMode {
                mode: "DNL-defined height",
                offset: at,
            });
        }
        if width == 0 {
            return Err(malformed("SOF", at, "zero width"));
        }
        let n = seg[5] as usize;
        if !(1..=4).contains(&n) || seg.len() != 6 + 3 * n {
            return Err(malformed("SOF", at, format!("bad component count {n}")));
        }
        let mut components = Vec::with_capacity(n);
        for c in seg[6..].chunks_exact(3) {
            let comp = FrameComponent {
                id: c[0],
                h_sampling: c[1] >> 4,
                v_sampling: c[1] & 0x0F,
                quant_table: c[2],
            };
            if !(1..=4).contains(&comp.h_sampling) || !(1..=4).contains(&comp.v_sampling) {
                return Err(malformed(
                    "SOF",
                    at,
                    format!("bad sampling factors for component {}", comp.id),
                ));
            }
            if comp.quant_table > 3 {
                return Err(malformed(
                    "SOF",
                    at,
                    format!("quantization table id {}", comp.quant_table),
                ));
            }
            if components.iter().any(|o: &FrameComponent| o.id == comp.id) {
                return Err(malformed(
                    "SOF",
                    at,
                    format!("duplicate component id {}", comp.id),
                ));
            }
            components.push(comp);
        }
        let frame = Frame {
            precision,
            width,
            height,
            components,
        };
        for ci in 0..n {
            let c = &frame.components[ci];
            if frame.max_h() % c.h_sampling as usize != 0
                || frame.max_v() % c.v_sampling as usize != 0
            {
                return Err(Error::UnsupportedMode {
                    mode: "non-integral sampling ratio",
                    offset: at,
                });
            }
        }
        self.frame = Some(frame);
        Ok(())
    }

    fn quant_tables(&mut self, mut seg: &[u8], at: usize) -> Result<()> {
        while !seg.is_empty() {
            let precision = seg[0] >> 4;
            let id = seg[0] & 0x0F;
            if id > 3 {
                return Err(malformed("DQT", at, format!("table id {id}")));
            }
            let mut values = [0u16; 64];
            let used = match precision {
                0 => {
                    if seg.len() < 65 {
                        return Err(malformed("DQT", at, "table truncated"));
                    }
                    for (v, &b) in values.iter_mut().zip(&seg[1..65]) {
                        *v = b as u16;
                    }
                    65
                }
                1 => {
                    if seg.len() < 129 {
                        return Err(malformed("DQT", at, "table truncated"));
                    }
                    for (v, b) in values.iter_mut().zip(seg[1..129].chunks_exact(2)) {
                        *v = u16::from_be_bytes([b[0], b[1]]);
                    }
                    129
                }
                p => return Err(malformed("DQT", at, format!("precision {p}"))),
            };
            let table =
                QuantTable::from_zigzag(values).map_err(|e| malformed("DQT", at, e.to_string()))?;
            self.current_quant[id as usize] = Some(table);
            seg = &seg[used..];
        }
        Ok(())
    }

    fn huffman_tables(&mut self, mut seg: &[u8], at: usize) -> Result<()> {
        while !seg.is_empty() {
            if seg.len() < 17 {
                return Err(malformed("DHT", at, "table truncated"));
            }
            let class = seg[0] >> 4;
            let id = seg[0] & 0x0F;
            if class > 1 || id > 3 {
                return Err(malformed("DHT", at, format!("class {class} id {id}")));
            }
            let mut counts = [0u8; 16];
            counts.copy_from_slice(&seg[1..17]);
            let total: usize = counts.iter().map(|&c| c as usize).sum();
            if seg.len() < 17 + total {
                return Err(malformed("DHT", at, "symbol list truncated"));
            }
            let spec = HuffmanSpec::new(counts, seg[17..17 + total].to_vec())
                .map_err(|e| malformed("DHT", at, e.to_string()))?;
            if class == 0 {
                self.dc_tables[id as usize] = Some(spec);
            } else {
                self.ac_tables[id as usize] = Some(spec);
            }
            seg = &seg[17 + total..];
        }
        Ok(())
    }

    fn scan(&mut self, seg: &[u8], at: usize) -> Result<()> {
        let frame = self
            .frame
            .as_ref()
            .ok_or_else(|| malformed("SOS", at, "scan before frame header"))?;
        if seg.is_empty() {
            return Err(malformed("SOS", at, "empty header"));
        }
        let n = seg[0] as usize;
        if !(1..=4).contains(&n) || seg.len() != 4 + 2 * n {
            return Err(malformed("SOS", at, format!("bad component count {n}")));
        }
        let (ss, se, ahl) = (seg[1 + 2 * n], seg[2 + 2 * n], seg[3 + 2 * n]);
        if ss != 0 || se != 63 || ahl != 0 {
            return Err(Error::UnsupportedMode {
                mode: "spectral selection or successive approximation",
                offset: at,
            });
        }
        let mut components = Vec::with_capacity(n);
        for c in seg[1..1 + 2 * n].chunks_exact(2) {
            let ci = frame
                .components
                .iter()
                .position(|fc| fc.id == c[0])
                .ok_or_else(|| malformed("SOS", at, format!("unknown component id {}", c[0])))?;
            if components.iter().any(|s: &ScanComponent| s.component == ci)
                || self
                    .scans
                    .iter()
                    .any(|s| s.components.iter().any(|s| s.component == ci))
            {
                return Err(malformed(
                    "SOS",
                    at,
                    format!("component {} coded twice", c[0]),
                ));
            }
            let (dc_id, ac_id) = (c[1] >> 4, c[1] & 0x0F);
            let lookup = |tables: &[Option<HuffmanSpec>; 4], id: u8, kind| {
                tables
                    .get(id as usize)
                    .and_then(Clone::clone)
                    .ok_or(Error::UndefinedTable {
                        kind,
                        id,
                        offset: at,
                    })
            };
            let dc_table = lookup(&self.dc_tables, dc_id, "Huffman DC")?;
            let ac_table = lookup(&self.ac_tables, ac_id, "Huffman AC")?;
            let q = frame.components[ci].quant_table;
            if self.current_quant[q as usize].is_none() && self.latched_quant[q as usize].is_none()
            {
                return Err(Error::UndefinedTable {
                    kind: "quantization",
                    id: q,
                    offset: at,
                });
            }
            components.push(ScanComponent {
                component: ci,
                dc_table_id: dc_id,
                ac_table_id: ac_id,
                dc_table,
                ac_table,
            });
        }
        if n > 1 {
            let blocks: usize = components
                .iter()
                .map(|s| {
                    let c = &frame.components[s.component];
                    c.h_sampling as usize * c.v_sampling as usize
                })
                .sum();
            if blocks > 10 {
                return Err(malformed(
                    "SOS",
                    at,
                    format!("{blocks} blocks per MCU exceeds 10"),
                ));
            }
        }
        for s in &components {
            let q = frame.components[s.component].quant_table as usize;
            if self.latched_quant[q].is_none() {
                self.latched_quant[q] = Some(self.current_quant[q]);
            }
        }
        let segments = self.entropy_segments()?;
        self.scans.push(Scan {
            offset: at,
            components,
            restart_interval: self.restart_interval,
            segments,
        });
        Ok(())
    }

    /// Splits the entropy-coded data following a scan header at restart
    /// markers, leaving `pos` on the marker that ends the scan.
    fn entropy_segments(&mut self) -> Result<Vec<Range<usize>>> {
        let data = self.data;
        let mut segments = Vec::new();
        let mut start = self.pos;
        let mut i = self.pos;
        loop {
            let Some(rel) = data[i..].iter().position(|&b| b == 0xFF) else {
                return Err(Error::TruncatedScan { offset: data.len() });
            };
            i += rel;
            let Some(&next) = data.get(i + 1) else {
                return Err(Error::TruncatedScan { offset: data.len() });
            };
            match next {
                0x00 => i += 2,
                0xD0..=0xD7 => {
                    segments.push(start..i);
                    i += 2;
                    start = i;
                }
                _ => {
                    segments.push(start..i);
                    self.pos = i;
                    return Ok(segments);
                }
            }
        }
    }
}
