//! Content digests binding a record to the exact image bytes.
//!
//! The digest covers the whole file with all provenance chunks/segments
//! removed — hashing the chunk that stores the hash would be circular,
//! and covering all remaining bytes (not just pixels) means any metadata
//! tampering flips verification. Format: `sha256:<64 lowercase hex>`.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::container::{self, ContainerError, EmbedOptions};
use crate::jsonld::{self, CodecError, ContextRegistry, Style};
use crate::model::ProvenanceRecord;
use crate::{Mode, Warning};

#[derive(Debug, Error, PartialEq)]
pub enum IntegrityError {
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigestStatus {
    Ok,
    Modified,
    MissingDigest,
    MissingProvenance,
}

impl DigestStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DigestStatus::Ok => "OK",
            DigestStatus::Modified => "MODIFIED",
            DigestStatus::MissingDigest => "MISSING_DIGEST",
            DigestStatus::MissingProvenance => "MISSING_PROVENANCE",
        }
    }
}

/// The outcome of [`verify`]: the digest stored in the record (if any)
/// against the one recomputed from the file.
#[derive(Debug, Clone, PartialEq)]
pub struct DigestReport {
    pub status: DigestStatus,
    pub expected: Option<String>,
    pub actual: String,
    pub warnings: Vec<Warning>,
}

impl DigestReport {
    pub fn to_json(&self) -> crate::Json {
        let mut members = vec![(
            "status".to_string(),
            crate::Json::str(self.status.as_str()),
        )];
        if let Some(expected) = &self.expected {
            members.push(("expected".into(), crate::Json::str(expected.clone())));
        }
        members.push(("actual".into(), crate::Json::str(self.actual.clone())));
        crate::Json::Object(members)
    }
}

/// SHA-256 over the provenance-stripped file, rendered as
/// `sha256:<64 lowercase hex>`. Editing only the provenance payload never
/// changes this value.
pub fn content_digest(image: &[u8]) -> Result<String, ContainerError> {
    let stripped = container::strip(image)?;
    let digest = Sha256::digest(&stripped);
    let mut out = String::with_capacity(71);
    out.push_str("sha256:");
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    Ok(out)
}

/// Embeds `record` with its `contentDigest` set to the image's content
/// digest. The result verifies as [`DigestStatus::Ok`]. Re-sealing
/// replaces any previous payload; the digest is unaffected because it
/// never covers provenance bytes.
pub fn seal(
    image: &[u8],
    record: &ProvenanceRecord,
    options: EmbedOptions,
) -> Result<Vec<u8>, IntegrityError> {
    let mut sealed = record.clone();
    sealed.content_digest = Some(content_digest(image)?);
    let payload = jsonld::serialize_record(&sealed, Style::Canonical)?;
    Ok(container::embed(image, &payload, options)?.bytes)
}

/// Compares the digest stored in the embedded record against the digest
/// recomputed from the file.
pub fn verify(image: &[u8], registry: &ContextRegistry) -> Result<DigestReport, IntegrityError> {
    let actual = content_digest(image)?;
    let (payload, mut warnings) = container::extract_with_warnings(image)?;
    let Some(payload) = payload else {
        return Ok(DigestReport {
            status: DigestStatus::MissingProvenance,
            expected: None,
            actual,
            warnings,
        });
    };
    let (record, mut parse_warnings) = jsonld::parse_record(&payload, Mode::Lenient, registry)?;
    warnings.append(&mut parse_warnings);
    match record.content_digest {
        None => Ok(DigestReport {
            status: DigestStatus::MissingDigest,
            expected: None,
            actual,
            warnings,
        }),
        Some(expected) => {
            let status = if expected == actual {
                DigestStatus::Ok
            } else {
                DigestStatus::Modified
            };
            Ok(DigestReport {
                status,
                expected: Some(expected),
                actual,
                warnings,
            })
        }
    }
}
