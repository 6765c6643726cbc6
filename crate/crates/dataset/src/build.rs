//! Conversion of a split corpus into a DCTD file.

use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use dctpipe_core::codec::{decode_jpeg, encode_jpeg, RgbImage, Subsampling};
use dctpipe_core::{partial_decode, render_dct_image, to_channelized_tensor};
use image::imageops::FilterType;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, LabeledFile};
use crate::error::{DatasetError, Result};
use crate::format::{
    record_shape, write_header, write_record, DatasetManifest, DatasetRecord, Payload,
    Representation, SplitCounts, FORMAT_VERSION,
};
use crate::split::{split, SplitName, SplitRatios};

/// Fraction of source files that may be rejected before the build fails.
pub const MAX_REJECT_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    pub representation: Representation,
    pub quality: i32,
    pub subsampling: Subsampling,
    pub target_size: u32,
    pub luma_only: bool,
    pub ratios: SplitRatios,
    pub seed: u64,
    /// Conversion workers; 0 lets the thread pool decide.
    pub threads: usize,
}

impl BuildConfig {
    pub fn new(representation: Representation, seed: u64) -> Self {
        BuildConfig {
            representation,
            quality: 90,
            subsampling: Subsampling::S444,
            target_size: 256,
            luma_only: false,
            ratios: SplitRatios::default(),
            seed,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(DatasetError::InvalidConfig(why));
        if !(1..=100).contains(&self.quality) {
            return bad(format!("quality {} outside 1..=100", self.quality));
        }
        if self.target_size == 0 || self.target_size % 32 != 0 {
            return bad(format!(
                "target size {} is not a positive multiple of 32",
                self.target_size
            ));
        }
        if self.representation != Representation::Pixel
            && !self.luma_only
            && self.subsampling != Subsampling::S444
        {
            return bad(format!(
                "{} with all components needs 4:4:4 so the coefficient planes share one block grid",
                self.representation
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectsReport {
    pub total: usize,
    pub rejected: Vec<Reject>,
}

#[derive(Debug, Clone)]
pub struct BuildSummary {
    pub manifest: DatasetManifest,
    pub rejects: RejectsReport,
    pub rejects_path: PathBuf,
}

/// Where the rejects report for `output` is written.
pub fn rejects_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.rejects.json"))
}

pub fn path_digest(relative: &str) -> String {
    Sha256::digest(relative.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Reads PNG/BMP through the image crate and JPEG through the local codec.
pub fn load_rgb(bytes: &[u8]) -> std::result::Result<RgbImage, String> {
    if bytes.starts_with(&[0xFF, 0xD8]) {
        return decode_jpeg(bytes).map_err(|e| e.to_string());
    }
    let img = image::load_from_memory(bytes)
        .map_err(|e| e.to_string())?
        .to_rgb8();
    let (w, h) = img.dimensions();
    RgbImage::new(w, h, img.into_raw()).map_err(|e| e.to_string())
}

/// Bilinear resize to `size` x `size`.
pub fn resize_square(img: &RgbImage, size: u32) -> RgbImage {
    if img.width() == size && img.height() == size {
        return img.clone();
    }
    let buf = image::RgbImage::from_raw(img.width(), img.height(), img.samples().to_vec())
        .expect("RgbImage holds width * height * 3 samples");
    let out = image::imageops::resize(&buf, size, size, FilterType::Triangle);
    RgbImage::new(size, size, out.into_raw()).expect("resize output is well formed")
}

/// Resizes, encodes and converts one image into a record payload.
pub fn convert_image(
    img: &RgbImage,
    config: &BuildConfig,
) -> std::result::Result<(Vec<u32>, Payload), String> {
    let resized = resize_square(img, config.target_size);
    let jpeg =
        encode_jpeg(&resized, config.quality, config.subsampling).map_err(|e| e.to_string())?;
    let size = config.target_size;
    match config.representation {
        Representation::Pixel => {
            let decoded = decode_jpeg(&jpeg).map_err(|e| e.to_string())?;
            Ok((vec![size, size, 3], Payload::U8(decoded.into_samples())))
        }
        Representation::DctImage => {
            let planes = partial_decode(&jpeg).map_err(|e| e.to_string())?;
            let used = if config.luma_only {
                &planes.planes[..1]
            } else {
                &planes.planes[..]
            };
            let r = render_dct_image(used).map_err(|e| e.to_string())?;
            Ok((
                vec![r.height as u32, r.width as u32, r.channels as u32],
                Payload::U8(r.samples),
            ))
        }
        Representation::DctTensor => {
            let planes = partial_decode(&jpeg).map_err(|e| e.to_string())?;
            let used = if config.luma_only {
                &planes.planes[..1]
            } else {
                &planes.planes[..]
            };
            let mut values = Vec::new();
            let mut grid = [0u32; 2];
            for plane in used {
                let t = to_channelized_tensor(plane).map_err(|e| e.to_string())?;
                grid = [t.blocks_high as u32, t.blocks_wide as u32];
                values.extend_from_slice(&t.values);
            }
            Ok((
                vec![used.len() as u32, grid[0], grid[1], 64],
                Payload::F32(values),
            ))
        }
    }
}

fn convert_file(
    file: &LabeledFile,
    config: &BuildConfig,
) -> std::result::Result<(Vec<u32>, Payload), String> {
    let bytes = std::fs::read(&file.path).map_err(|e| e.to_string())?;
    let img = load_rgb(&bytes)?;
    convert_image(&img, config)
}

/// Splits the corpus, converts every file and writes `output` plus its
/// rejects report. Conversion runs on `config.threads` workers; records are
/// written by this thread in split order, so the file does not depend on the
/// worker count.
pub fn build_dataset(corpus: &Corpus, config: &BuildConfig, output: &Path) -> Result<BuildSummary> {
    config.validate()?;
    let splits = split(&corpus.files, config.ratios, config.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| DatasetError::InvalidConfig(format!("thread pool: {e}")))?;

    let dir = output
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let body_file = tempfile::tempfile_in(dir).map_err(DatasetError::io(dir))?;
    let mut body = BufWriter::new(body_file);
    let expected_shape = record_shape(config.representation, config.target_size, config.luma_only);

    let mut counts = SplitCounts::default();
    let mut digests = Vec::new();
    let mut rejected = Vec::new();
    let chunk = pool.current_num_threads().max(1) * 4;
    for name in SplitName::ALL {
        let files = splits.get(name);
        for batch in files.chunks(chunk) {
            let converted: Vec<_> =
                pool.install(|| batch.par_iter().map(|f| convert_file(f, config)).collect());
            for (file, result) in batch.iter().zip(converted) {
                match result {
                    Ok((shape, payload)) if shape == expected_shape => {
                        let record = DatasetRecord {
                            label: file.label as u32,
                            shape,
                            payload,
                        };
                        write_record(&mut body, &record).map_err(DatasetError::io(dir))?;
                        digests.push(path_digest(&file.relative));
                        match name {
                            SplitName::Train => counts.train += 1,
                            SplitName::Val => counts.val += 1,
                            SplitName::Test => counts.test += 1,
                        }
                    }
                    Ok((shape, _)) => rejected.push(Reject {
                        path: file.relative.clone(),
                        reason: format!("shape {shape:?}, expected {expected_shape:?}"),
                    }),
                    Err(reason) => {
                        log::warn!("rejecting {}: {reason}", file.relative);
                        rejected.push(Reject {
                            path: file.relative.clone(),
                            reason,
                        });
                    }
                }
            }
        }
    }

    let total = corpus.files.len();
    let rejects = RejectsReport { total, rejected };
    let report_path = rejects_path(output);
    let report_json = serde_json::to_vec_pretty(&rejects).expect("rejects report serializes");
    std::fs::write(&report_path, report_json).map_err(DatasetError::io(&report_path))?;
    if rejects.rejected.len() as f64 > MAX_REJECT_FRACTION * total as f64 {
        return Err(DatasetError::TooManyRejects {
            rejected: rejects.rejected.len(),
            total,
            report: report_path,
        });
    }

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        classes: corpus.classes.clone(),
        representation: config.representation,
        quality: Some(config.quality),
        subsampling: Some(config.subsampling),
        target_size: Some(config.target_size),
        luma_only: config.luma_only,
        record_shape: expected_shape,
        split_ratios: config.ratios,
        split_seed: config.seed,
        counts,
        source_digests: digests,
    };

    let mut body = body.into_inner().map_err(|e| DatasetError::Io {
        path: dir.to_path_buf(),
        source: e.into_error(),
    })?;
    body.seek(SeekFrom::Start(0))
        .map_err(DatasetError::io(dir))?;
    let staged = tempfile::NamedTempFile::new_in(dir).map_err(DatasetError::io(dir))?;
    {
        let mut out = BufWriter::new(staged.as_file());
        write_header(&mut out, &manifest).map_err(DatasetError::io(output))?;
        std::io::copy(&mut body, &mut out).map_err(DatasetError::io(output))?;
        out.flush().map_err(DatasetError::io(output))?;
    }
    staged.persist(output).map_err(|e| DatasetError::Io {
        path: output.to_path_buf(),
        source: e.error,
    })?;

    Ok(BuildSummary {
        manifest,
        rejects,
        rejects_path: report_path,
    })
}
