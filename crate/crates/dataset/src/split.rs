//! Seeded, stratified train/validation/test assignment.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledFile;
use crate::error::{DatasetError, Result};

const RATIO_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let r = SplitRatios { train, val, test };
        let parts = r.as_array();
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(DatasetError::InvalidRatios(format!(
                "{r} has a negative or non-finite part"
            )));
        }
        if train <= 0.0 {
            return Err(DatasetError::InvalidRatios(format!(
                "{r} leaves nothing to train on"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > RATIO_TOLERANCE {
            return Err(DatasetError::InvalidRatios(format!(
                "{r} does not sum to 1"
            )));
        }
        Ok(r)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    /// Splits `n` items by largest remainder, so each part is within one
    /// item of its exact share.
    pub fn allocate(&self, n: usize) -> [usize; 3] {
        let exact = self.as_array().map(|r| r * n as f64);
        let mut counts = exact.map(|e| (e + 1e-9).floor() as usize);
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| {
            let fa = exact[a] - counts[a] as f64;
            let fb = exact[b] - counts[b] as f64;
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let assigned: usize = counts.iter().sum();
        for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }

    fn nonzero_parts(&self) -> usize {
        self.as_array().iter().filter(|&&r| r > 0.0).count()
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl fmt::Display for SplitRatios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.train, self.val, self.test)
    }
}

impl FromStr for SplitRatios {
    type Err = DatasetError;

    /// Parses `train,val,test`, e.g. `0.8,0.1,0.1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split([',', '/'])
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| DatasetError::InvalidRatios(format!("{s:?}: {e}")))?;
        match parts[..] {
            [train, val, test] => SplitRatios::new(train, val, test),
            _ => Err(DatasetError::InvalidRatios(format!(
                "{s:?}: expected three comma-separated parts"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Val, SplitName::Test];
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitName::Train => "train",
            SplitName::Val => "val",
            SplitName::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<LabeledFile>,
    pub val: Vec<LabeledFile>,
    pub test: Vec<LabeledFile>,
    /// Classes too small to spread over every nonempty split; all of their
    /// files went to train.
    pub undersized: Vec<usize>,
}

impl Splits {
    pub fn get(&self, name: SplitName) -> &[LabeledFile] {
        match name {
            SplitName::Train => &self.train,
            SplitName::Val => &self.val,
            SplitName::Test => &self.test,
        }
    }
}

/// Shuffles each class with one generator seeded from `seed` (classes in
/// label order) and cuts it by `ratios`. Within a split, files keep class
/// order and the shuffled order inside each class.
pub fn split(files: &[LabeledFile], ratios: SplitRatios, seed: u64) -> Splits {
    let mut by_class: BTreeMap<usize, Vec<&LabeledFile>> = BTreeMap::new();
    for f in files {
        by_class.entry(f.label).or_default().push(f);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Splits::default();
    for (label, mut members) in by_class {
        members.shuffle(&mut rng);
        if members.len() < ratios.nonzero_parts() {
            log::warn!(
                "class {label} has {} files, fewer than {} splits; all go to train",
                members.len(),
                ratios.nonzero_parts()
            );
            out.undersized.push(label);
            out.train.extend(members.into_iter().cloned());
            continue;
        }
        let [n_train, n_val, _] = ratios.allocate(members.len());
        for (i, f) in members.into_iter().enumerate() {
            let dest = if i < n_train {
                &mut out.train
            } else if i < n_train + n_val {
                &mut out.val
            } else {
                &mut out.test
            };
            dest.push(f.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_examples() {
        let r = SplitRatios::default();
        assert_eq!(r.allocate(100), [80, 10, 10]);
        assert_eq!(r.allocate(7), [5, 1, 1]);
        assert_eq!(
            SplitRatios::new(1.0, 0.0, 0.0).unwrap().allocate(9),
            [9, 0, 0]
        );
        assert_eq!(
            SplitRatios::new(5.0 / 6.0, 0.0, 1.0 / 6.0)
                .unwrap()
                .allocate(240),
            [200, 0, 40]
        );
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(
            "0.8,0.1,0.1".parse::<SplitRatios>().unwrap(),
            SplitRatios::default()
        );
        assert!("0.8,0.1".parse::<SplitRatios>().is_err());
        assert!("0.5,0.1,0.1".parse::<SplitRatios>().is_err());
        assert!("0,0.5,0.5".parse::<SplitRatios>().is_err());
        assert!("1.2,-0.1,-0.1".parse::<SplitRatios>().is_err());
    }
}
