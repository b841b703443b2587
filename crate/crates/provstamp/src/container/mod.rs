//! Byte-exact reading and writing of provenance payloads inside PNG and
//! JPEG files. Pixel data passes through untouched; only the provenance
//! chunk/segments are added, replaced or removed.

pub mod jpeg;
pub mod png;

use thiserror::Error;

use crate::Warning;

#[derive(Debug, Error, PartialEq)]
pub enum ContainerError {
    #[error("unsupported image format")]
    UnsupportedFormat,
    #[error("corrupt container: {0}")]
    CorruptContainer(String),
    #[error("refusing to embed an empty payload")]
    EmptyPayload,
    #[error("provenance segment set is incomplete; missing indices {0:?}")]
    IncompleteSegments(Vec<u16>),
    #[error("bad compressed payload: {0}")]
    BadCompression(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Png,
    Jpeg,
    Unknown,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Png => "PNG",
            Format::Jpeg => "JPEG",
            Format::Unknown => "unknown",
        }
    }
}

/// The outcome of an embed: the rewritten file, whether existing
/// provenance was replaced, and how many carrier units were written
/// (always 1 for PNG; 1 or more APP1 segments for JPEG).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedResult {
    pub bytes: Vec<u8>,
    pub replaced_existing: bool,
    pub segment_count: usize,
}

/// Options accepted by [`embed`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbedOptions {
    /// PNG only: store the payload as a DEFLATE (zlib) stream inside the
    /// iTXt chunk. JPEG payloads are always stored raw.
    pub compress: bool,
}

/// Sniffs the container format from magic bytes.
pub fn detect_format(bytes: &[u8]) -> Format {
    if bytes.starts_with(&png::SIGNATURE) {
        Format::Png
    } else if bytes.starts_with(&[0xFF, 0xD8]) {
        Format::Jpeg
    } else {
        Format::Unknown
    }
}

/// Replaces any existing provenance payload in the image with `payload`.
/// The rest of the file is preserved byte-for-byte.
pub fn embed(
    image: &[u8],
    payload: &[u8],
    options: EmbedOptions,
) -> Result<EmbedResult, ContainerError> {
    if payload.is_empty() {
        return Err(ContainerError::EmptyPayload);
    }
    match detect_format(image) {
        Format::Png => png::embed(image, payload, options.compress),
        Format::Jpeg => jpeg::embed(image, payload),
        Format::Unknown => Err(ContainerError::UnsupportedFormat),
    }
}

/// Returns the embedded payload, or `None` when the image carries no
/// provenance. Multi-segment JPEG payloads are reassembled by index;
/// compressed PNG payloads are inflated.
pub fn extract(image: &[u8]) -> Result<Option<Vec<u8>>, ContainerError> {
    extract_with_warnings(image).map(|(payload, _)| payload)
}

/// Like [`extract`], also surfacing non-fatal diagnostics (e.g. a file
/// carrying several provenance chunks, where the first wins).
pub fn extract_with_warnings(
    image: &[u8],
) -> Result<(Option<Vec<u8>>, Vec<Warning>), ContainerError> {
    match detect_format(image) {
        Format::Png => png::extract(image),
        Format::Jpeg => jpeg::extract(image),
        Format::Unknown => Err(ContainerError::UnsupportedFormat),
    }
}

/// Removes every provenance chunk/segment, leaving everything else
/// byte-identical. A no-op for images without provenance.
pub fn strip(image: &[u8]) -> Result<Vec<u8>, ContainerError> {
    match detect_format(image) {
        Format::Png => png::strip(image),
        Format::Jpeg => jpeg::strip(image),
        Format::Unknown => Err(ContainerError::UnsupportedFormat),
    }
}
