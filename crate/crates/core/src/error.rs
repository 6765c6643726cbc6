//! Error type shared by the codec and the partial decoder.

use thiserror::Error;

/// Errors produced while encoding, parsing, or decoding JPEG data.
///
/// Variants that originate in a bitstream carry the byte offset (from the
/// start of the input) at which the problem was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid quality {0}: expected 1..=100")]
    InvalidQuality(i32),

    #[error("invalid quantization table: {0}")]
    InvalidQuantTable(String),

    #[error("invalid Huffman table: {0}")]
    InvalidHuffmanTable(String),

    #[error("empty component")]
    EmptyComponent,

    #[error("corrupt run length")]
    CorruptRunLength,

    #[error("unencodable symbol 0x{symbol:02X}")]
    UnencodableSymbol { symbol: u16 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("corrupt entropy stream at byte {offset}")]
    CorruptEntropy { offset: usize },

    #[error("truncated scan at byte {offset}")]
    TruncatedScan { offset: usize },

    #[error("missing SOI marker at byte 0")]
    MissingSoi,

    #[error("missing EOI marker at byte {offset}")]
    MissingEoi { offset: usize },

    #[error("unexpected end of stream at byte {offset}")]
    UnexpectedEof { offset: usize },

    #[error("unknown marker 0xFF{marker:02X} at byte {offset}")]
    UnknownMarker { marker: u8, offset: usize },

    #[error("unsupported mode ({mode}) at byte {offset}")]
    UnsupportedMode { mode: &'static str, offset: usize },

    #[error("table id referenced but undefined: {kind} table {id} at byte {offset}")]
    UndefinedTable {
        kind: &'static str,
        id: u8,
        offset: usize,
    },

    #[error("malformed {segment} segment at byte {offset}: {detail}")]
    Malformed {
        segment: &'static str,
        offset: usize,
        detail: String,
    },

    #[error("table id referenced but undefined: quantization table {0}")]
    MissingQuantTable(u8),

    #[error("unsupported mode ({0}-component colour)")]
    UnsupportedComponents(usize),

    #[error("coefficient planes are {found}, expected {expected}")]
    WrongPlaneState {
        expected: &'static str,
        found: &'static str,
    },

    #[error("plane geometry mismatch: {0}")]
    GeometryMismatch(String),
}

impl Error {
    /// Byte offset into the source stream, when the error has one.
    pub fn offset(&self) -> Option<usize> {
        match *self {
            Error::MissingSoi => Some(0),
            Error::CorruptEntropy { offset }
            | Error::TruncatedScan { offset }
            | Error::MissingEoi { offset }
            | Error::UnexpectedEof { offset }
            | Error::UnknownMarker { offset, .. }
            | Error::UnsupportedMode { offset, .. }
            | Error::UndefinedTable { offset, .. }
            | Error::Malformed { offset, .. } => Some(offset),
            _ => None,
        }
    }

    /// True for streams that are valid JPEG but use a mode this crate rejects.
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            Error::UnsupportedMode { .. } | Error::UnsupportedComponents(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
