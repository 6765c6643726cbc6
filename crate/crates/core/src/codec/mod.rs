//! Baseline sequential JPEG: the individual transform stages and the full
//! encoder and decoder built from them.

pub(crate) mod bitio;
pub mod color;
pub mod dct;
pub mod decoder;
pub mod dpcm;
pub mod encoder;
pub mod huffman;
pub mod quant;
pub mod rle;
pub mod stream;
pub mod zigzag;

pub use color::{rgb_to_ycbcr, upsample, ycbcr_to_rgb, Plane, RgbImage, Subsampling, YcbcrImage};
pub use dct::{forward_dct, inverse_dct, DctBlock, SampleBlock};
pub use decoder::{
    assemble_rgb, decode_jpeg, decode_jpeg_with_stats, reconstruct_samples, upsample_components,
};
pub use dpcm::{dpcm_decode, dpcm_encode, DpcmStream};
pub use encoder::{encode_jpeg, encode_jpeg_with_planes, EncodedJpeg};
pub use huffman::{entropy_decode, entropy_encode, HuffmanSpec};
pub use quant::{dequantize, quality_to_quant_tables, quantize, QuantTable, QuantizedBlock};
pub use rle::{rle_decode, rle_encode, RleSymbol, RleSymbolSequence};
pub use stream::{parse_stream, Frame, JpegStream, Scan};
pub use zigzag::{zigzag_scan, zigzag_unscan};
