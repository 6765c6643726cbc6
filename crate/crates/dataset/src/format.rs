//! The DCTD container.
//!
//! ```text
//! "DCTD" | version: u32 | manifest length: u32 | manifest (UTF-8 JSON)
//! record* = label: u32 | rank: u32 | dims: u32 * rank | payload
//! ```
//!
//! All integers and payload scalars are little-endian. Payloads are `u8` for
//! the pixel and dct-image representations and `f32` for dct-tensor. Records
//! are stored train first, then validation, then test.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use dctpipe_core::codec::Subsampling;
use serde::{Deserialize, Serialize};

use crate::corpus::ClassLabel;
use crate::error::{DatasetError, Result};
use crate::split::{SplitName, SplitRatios};

pub const MAGIC: &[u8; 4] = b"DCTD";
pub const FORMAT_VERSION: u32 = 1;
const MAX_RANK: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Pixel,
    DctImage,
    DctTensor,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Pixel => "pixel",
            Representation::DctImage => "dct-image",
            Representation::DctTensor => "dct-tensor",
        })
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pixel" => Ok(Representation::Pixel),
            "dct-image" => Ok(Representation::DctImage),
            "dct-tensor" => Ok(Representation::DctTensor),
            other => Err(format!(
                "unknown representation {other:?} (expected pixel, dct-image or dct-tensor)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }

    pub fn get(&self, name: SplitName) -> usize {
        match name {
            SplitName::Train => self.train,
            SplitName::Val => self.val,
            SplitName::Test => self.test,
        }
    }

    /// Record index range of a split within the file.
    pub fn range(&self, name: SplitName) -> std::ops::Range<usize> {
        match name {
            SplitName::Train => 0..self.train,
            SplitName::Val => self.train..self.train + self.val,
            SplitName::Test => self.train + self.val..self.total(),
        }
    }
}

/// `(size, size, channels)` for the image representations and
/// `(components, size / 8, size / 8, 64)` for dct-tensor. Pixel records are
/// always RGB.
pub fn record_shape(representation: Representation, size: u32, luma_only: bool) -> Vec<u32> {
    let channels = if luma_only && representation != Representation::Pixel {
        1
    } else {
        3
    };
    match representation {
        Representation::Pixel | Representation::DctImage => vec![size, size, channels],
        Representation::DctTensor => vec![channels, size / 8, size / 8, 64],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub classes: Vec<ClassLabel>,
    pub representation: Representation,
    /// Encoding quality; absent for coefficients taken from an existing JPEG.
    pub quality: Option<i32>,
    pub subsampling: Option<Subsampling>,
    /// Square resize target; absent when images kept their own size.
    pub target_size: Option<u32>,
    /// Only the luma component is stored (coefficient representations).
    pub luma_only: bool,
    pub record_shape: Vec<u32>,
    pub split_ratios: SplitRatios,
    pub split_seed: u64,
    pub counts: SplitCounts,
    /// SHA-256 of each record's corpus-relative source path, in record order.
    pub source_digests: Vec<String>,
}

impl DatasetManifest {
    pub fn feature_dim(&self) -> usize {
        self.record_shape.iter().map(|&d| d as usize).product()
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn split_of(&self, record: usize) -> Option<SplitName> {
        SplitName::ALL
            .into_iter()
            .find(|&s| self.counts.range(s).contains(&record))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(DatasetError::BadManifest(why));
        if self.record_shape.is_empty() || self.record_shape.len() > MAX_RANK as usize {
            return bad(format!(
                "record rank {} outside 1..={MAX_RANK}",
                self.record_shape.len()
            ));
        }
        if let Some(size) = self.target_size {
            if size == 0 || size % 32 != 0 {
                return bad(format!(
                    "target size {size} is not a positive multiple of 32"
                ));
            }
            let derived = record_shape(self.representation, size, self.luma_only);
            if self.record_shape != derived {
                return bad(format!(
                    "record shape {:?} disagrees with target size ({derived:?})",
                    self.record_shape
                ));
            }
        }
        if self.source_digests.len() != self.counts.total() {
            return bad(format!(
                "{} source digests for {} records",
                self.source_digests.len(),
                self.counts.total()
            ));
        }
        if self.classes.iter().enumerate().any(|(i, c)| c.index != i) {
            return bad("class indices are not dense and ordered".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::U8(v) => v.len(),
            Payload::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Payload::U8(v) => v.iter().map(|&x| x as f64).collect(),
            Payload::F32(v) => v.iter().map(|&x| x as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub label: u32,
    pub shape: Vec<u32>,
    pub payload: Payload,
}

pub fn write_header<W: Write>(out: &mut W, manifest: &DatasetManifest) -> io::Result<()> {
    let json = serde_json::to_vec(manifest).map_err(io::Error::other)?;
    let len =
        u32::try_from(json.len()).map_err(|_| io::Error::other("manifest larger than 4 GiB"))?;
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&len.to_le_bytes())?;
    out.write_all(&json)
}

pub fn write_record<W: Write>(out: &mut W, record: &DatasetRecord) -> io::Result<()> {
    out.write_all(&record.label.to_le_bytes())?;
    out.write_all(&(record.shape.len() as u32).to_le_bytes())?;
    for d in &record.shape {
        out.write_all(&d.to_le_bytes())?;
    }
    match &record.payload {
        Payload::U8(v) => out.write_all(v),
        Payload::F32(v) => {
            let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
            out.write_all(&bytes)
        }
    }
}

/// Streams records from a DCTD file, validating each against the manifest.
pub struct DatasetReader<R> {
    inner: R,
    manifest: DatasetManifest,
    shape: Vec<u32>,
    next: usize,
    failed: bool,
}

impl DatasetReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(DatasetError::io(path))?;
        DatasetReader::new(BufReader::new(file))
    }
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn header_error(e: io::Error) -> DatasetError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        DatasetError::NotDatasetFile
    } else {
        DatasetError::Io {
            path: "<dataset header>".into(),
            source: e,
        }
    }
}

impl<R: Read> DatasetReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        inner.read_exact(&mut magic).map_err(header_error)?;
        if &magic != MAGIC {
            return Err(DatasetError::NotDatasetFile);
        }
        let version = read_u32(&mut inner).map_err(header_error)?;
        if version != FORMAT_VERSION {
            return Err(DatasetError::UnsupportedVersion(version));
        }
        let len = read_u32(&mut inner).map_err(header_error)? as usize;
        let mut json = Vec::new();
        inner
            .by_ref()
            .take(len as u64)
            .read_to_end(&mut json)
            .map_err(header_error)?;
        if json.len() != len {
            return Err(DatasetError::BadManifest(format!(
                "manifest truncated at {} of {len} bytes",
                json.len()
            )));
        }
        let manifest: DatasetManifest =
            serde_json::from_slice(&json).map_err(|e| DatasetError::BadManifest(e.to_string()))?;
        if manifest.format_version != version {
            return Err(DatasetError::BadManifest(format!(
                "manifest version {} disagrees with header version {version}",
                manifest.format_version
            )));
        }
        manifest.validate()?;
        let shape = manifest.record_shape.clone();
        Ok(DatasetReader {
            inner,
            manifest,
            shape,
            next: 0,
            failed: false,
        })
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    fn read_record(&mut self) -> Result<DatasetRecord> {
        let index = self.next;
        let truncated = |e: io::Error| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                DatasetError::TruncatedRecord(index)
            } else {
                DatasetError::Io {
                    path: format!("<record {index}>").into(),
                    source: e,
                }
            }
        };
        let label = read_u32(&mut self.inner).map_err(truncated)?;
        let rank = read_u32(&mut self.inner).map_err(truncated)?;
        if rank > MAX_RANK {
            return Err(DatasetError::ShapeMismatch {
                record: index,
                expected: self.shape.clone(),
                found: vec![rank],
            });
        }
        let shape = (0..rank)
            .map(|_| read_u32(&mut self.inner))
            .collect::<io::Result<Vec<u32>>>()
            .map_err(truncated)?;
        if shape != self.shape {
            return Err(DatasetError::ShapeMismatch {
                record: index,
                expected: self.shape.clone(),
                found: shape,
            });
        }
        if label as usize >= self.manifest.classes.len() {
            return Err(DatasetError::LabelOutOfRange {
                record: index,
                label,
                classes: self.manifest.classes.len(),
            });
        }
        let n: usize = shape.iter().map(|&d| d as usize).product();
        let payload = match self.manifest.representation {
            Representation::Pixel | Representation::DctImage => {
                let mut v = vec![0u8; n];
                self.inner.read_exact(&mut v).map_err(truncated)?;
                Payload::U8(v)
            }
            Representation::DctTensor => {
                let mut raw = vec![0u8; n * 4];
                self.inner.read_exact(&mut raw).map_err(truncated)?;
                Payload::F32(
                    raw.chunks_exact(4)
                        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                        .collect(),
                )
            }
        };
        Ok(DatasetRecord {
            label,
            shape,
            payload,
        })
    }

    fn check_end(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe) {
            Ok(0) => Ok(()),
            Ok(_) => Err(DatasetError::TrailingData(self.next.saturating_sub(1))),
            Err(e) => Err(DatasetError::Io {
                path: "<dataset trailer>".into(),
                source: e,
            }),
        }
    }
}

impl<R: Read> Iterator for DatasetReader<R> {
    type Item = Result<DatasetRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let total = self.manifest.counts.total();
        if self.next >= total {
            self.failed = true;
            return self.check_end().err().map(Err);
        }
        let record = self.read_record();
        self.next += 1;
        if record.is_err() {
            self.failed = true;
        }
        Some(record)
    }
}

/// Reads a whole file: the manifest and every record in order.
pub fn read_dataset(path: &Path) -> Result<(DatasetManifest, Vec<DatasetRecord>)> {
    let reader = DatasetReader::open(path)?;
    let manifest = reader.manifest().clone();
    let records = reader.collect::<Result<Vec<_>>>()?;
    Ok((manifest, records))
}
