//! Baseline JPEG codec with a partial-decode path that stops at dequantized
//! DCT coefficients, plus a small softmax classifier and evaluation metrics
//! for compressed-domain image classification.

pub mod classifier;
pub mod codec;
pub mod error;
pub mod metrics;
pub mod partial;

pub use error::{Error, Result};
pub use partial::{
    dequantize_planes, extract_coefficients, partial_decode, partial_decode_with_stats,
    render_dct_image, to_channelized_tensor, ChannelizedTensor, CoefficientPlane,
    CoefficientPlanes, CoefficientState, DctImageRendering, DecodeStats,
};
