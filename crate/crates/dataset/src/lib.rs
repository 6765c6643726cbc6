//! Directory trees of labeled images to deterministic, versioned DCTD
//! dataset files in pixel, DCT-rendering or channelized-tensor form.

pub mod build;
pub mod corpus;
pub mod error;
pub mod examples;
pub mod format;
pub mod split;
pub mod synthetic;

pub use build::{build_dataset, BuildConfig, BuildSummary, Reject, RejectsReport};
pub use corpus::{scan_corpus, ClassLabel, Corpus, LabeledFile};
pub use error::{DatasetError, Result};
pub use examples::{load_examples, SplitExamples};
pub use format::{
    read_dataset, DatasetManifest, DatasetReader, DatasetRecord, Payload, Representation,
    SplitCounts,
};
pub use split::{split, SplitName, SplitRatios, Splits};
