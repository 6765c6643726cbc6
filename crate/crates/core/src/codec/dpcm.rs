//! Differential coding of DC coefficients.

use crate::error::{Error, Result};

/// DC differences for one component: `d[0] = dc[0]`, `d[i] = dc[i] - dc[i-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DpcmStream(pub Vec<i32>);

impl DpcmStream {
    pub fn diffs(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn dpcm_encode(dc_values: &[i32]) -> Result<DpcmStream> {
    if dc_values.is_empty() {
        return Err(Error::EmptyComponent);
    }
    let mut prev = 0;
    Ok(DpcmStream(
        dc_values
            .iter()
            .map(|&dc| {
                let d = dc - prev;
                prev = dc;
                d
            })
            .collect(),
    ))
}

pub fn dpcm_decode(stream: &DpcmStream) -> Result<Vec<i32>> {
    if stream.is_empty() {
        return Err(Error::EmptyComponent);
    }
    Ok(stream
        .0
        .iter()
        .scan(0i32, |acc, &d| {
            *acc += d;
            Some(*acc)
        })
        .collect())
}
