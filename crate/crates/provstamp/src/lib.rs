//! Per-image provenance embedded as JSON-LD inside the image file.
//!
//! `provstamp` stores a provenance record — origins, transformations and
//! revisions — as a JSON-LD document carried by the image container itself
//! (a PNG `iTXt` chunk or JPEG `APP1` segments), so the description can
//! never drift away from the pixels it describes. On top of the carrier
//! the crate provides:
//!
//! - a provenance record model with validation, append-only event
//!   semantics and revision replay including reverts ([`model`])
//! - a restricted JSON-LD profile: offline context registry, term and
//!   compact-IRI expansion, compaction and canonical serialization
//!   ([`jsonld`])
//! - byte-exact embedding, extraction and stripping for PNG and JPEG
//!   without touching pixel data ([`container`])
//! - content digests binding a record to the exact image bytes
//!   ([`integrity`])
//! - a filter-expression language plus directory scanning, persistent
//!   indexing and dataset summaries ([`query`])
//!
//! The byte-level layouts are documented in `FORMAT.md` at the repository
//! root.

pub mod container;
pub mod integrity;
pub mod json;
pub mod jsonld;
pub mod model;
pub mod query;

pub use json::{canonicalize, canonically_equal, Json, JsonError, Number};

/// Strictness used by parsing, validation and append operations.
///
/// Strict mode turns recoverable oddities (duplicate keys, unknown terms,
/// out-of-order timestamps) into errors; lenient mode downgrades them to
/// warnings and keeps going.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Lenient,
}

/// A non-fatal diagnostic produced by lenient operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub code: &'static str,
    pub message: String,
}

impl Warning {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Warning {
            code,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}
