use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dctpipe_core::codec::Subsampling;
use dctpipe_dataset::{Representation, SplitName, SplitRatios};

#[derive(Debug, Parser)]
#[command(
    name = "dctpipe",
    version,
    about = "JPEG compressed-domain feature pipeline"
)]
pub struct Cli {
    /// Seed for every randomized step; required by build-dataset and train.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Dataset conversion workers (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output file.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a PNG, BMP or JPEG image as baseline JPEG.
    Encode(EncodeArgs),
    /// Decode a baseline JPEG to PNG.
    Decode(DecodeArgs),
    /// Partially decode a JPEG to its dequantized coefficients.
    ExtractDct(ExtractArgs),
    /// Convert a directory-per-class image tree into a DCTD dataset file.
    BuildDataset(BuildArgs),
    /// Train the softmax baseline on a dataset's train split.
    Train(TrainArgs),
    /// Evaluate a model on one split of a dataset.
    Evaluate(EvaluateArgs),
    /// Time partial decoding against full decoding over a JPEG corpus.
    Bench(BenchArgs),
}

fn quality(s: &str) -> Result<i32, String> {
    let q: i32 = s.parse().map_err(|e| format!("{e}"))?;
    if (1..=100).contains(&q) {
        Ok(q)
    } else {
        Err(format!("{q} is outside 1..=100"))
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "75", value_parser = quality)]
    pub quality: i32,
    #[arg(long, default_value = "444", value_parser = clap::value_parser!(Subsampling))]
    pub subsampling: Subsampling,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["render", "tensor"])))]
pub struct ExtractArgs {
    pub input: PathBuf,
    /// Write the coefficient rendering as a PNG.
    #[arg(long)]
    pub render: bool,
    /// Write the channelized coefficient tensor as a one-record DCTD file.
    #[arg(long)]
    pub tensor: bool,
    /// Luma component only.
    #[arg(long)]
    pub luma: bool,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub root: PathBuf,
    #[arg(long, default_value = "dct-tensor", value_parser = clap::value_parser!(Representation))]
    pub representation: Representation,
    #[arg(long, default_value = "90", value_parser = quality)]
    pub quality: i32,
    /// Square target size in pixels; a multiple of 32.
    #[arg(long, default_value_t = 256)]
    pub size: u32,
    /// train,val,test ratios.
    #[arg(long, default_value = "0.8,0.1,0.1", value_parser = clap::value_parser!(SplitRatios))]
    pub split: SplitRatios,
    #[arg(long, default_value = "444", value_parser = clap::value_parser!(Subsampling))]
    pub subsampling: Subsampling,
    /// Keep only the luma component (coefficient representations).
    #[arg(long)]
    pub luma: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    /// History JSON path; defaults to `<model>.history.json`.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for SplitName {
    fn from(s: SplitArg) -> SplitName {
        match s {
            SplitArg::Train => SplitName::Train,
            SplitArg::Val => SplitName::Val,
            SplitArg::Test => SplitName::Test,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub model: PathBuf,
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    #[arg(long, default_value_t = 3)]
    pub topk: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub corpus: PathBuf,
    /// Timed passes over the corpus per decode path.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}
