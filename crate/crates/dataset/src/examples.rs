//! Flattening dataset records into classifier inputs.

use std::path::Path;

use dctpipe_core::classifier::Examples;

use crate::error::Result;
use crate::format::{DatasetManifest, DatasetReader};
use crate::split::SplitName;

pub struct SplitExamples {
    pub manifest: DatasetManifest,
    pub train: Examples,
    pub val: Examples,
    pub test: Examples,
}

impl SplitExamples {
    pub fn get(&self, name: SplitName) -> &Examples {
        match name {
            SplitName::Train => &self.train,
            SplitName::Val => &self.val,
            SplitName::Test => &self.test,
        }
    }
}

/// Reads a dataset file and flattens every record, in stored order, into
/// the examples of its split.
pub fn load_examples(path: &Path) -> Result<SplitExamples> {
    let reader = DatasetReader::open(path)?;
    let manifest = reader.manifest().clone();
    let dim = manifest.feature_dim();
    let mut out = SplitExamples {
        train: Examples::new(dim),
        val: Examples::new(dim),
        test: Examples::new(dim),
        manifest,
    };
    for (i, record) in reader.enumerate() {
        let record = record?;
        let split = out
            .manifest
            .split_of(i)
            .expect("reader stops at the manifest count");
        let dest = match split {
            SplitName::Train => &mut out.train,
            SplitName::Val => &mut out.val,
            SplitName::Test => &mut out.test,
        };
        dest.push(record.payload.to_f64(), record.label as usize)?;
    }
    Ok(out)
}
