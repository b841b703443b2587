//! Provenance record schema, validation and revision replay.

mod record;
mod timestamp;
pub mod validate;

pub use record::{
    Agent, AgentType, Annotation, CriterionEntry, DatasetDescriptor, EventType, Fidelity,
    GenerationParams, ProvenanceRecord, RecordOrigin, Requirement, Revision, RevisionAction,
    RevisionRequest, Scalar, ScalarMap, Split, TransformationEvent,
};
pub use timestamp::Timestamp;
pub use validate::{validate_record, Severity, ValidationReport, Violation};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("missing required field {0:?}")]
    MissingField(&'static str),
    #[error("fidelity mismatch: {0}")]
    FidelityMismatch(String),
    #[error("event timestamp {next} precedes the last transformation at {last}")]
    TimestampRegression { last: String, next: String },
    #[error("revert target version {target} does not exist (latest is {latest})")]
    UnknownTargetVersion { target: u32, latest: u32 },
    #[error("targetVersion is only valid on revert revisions, not {0:?}")]
    UnexpectedTargetVersion(&'static str),
    #[error("invalid timestamp {0}")]
    InvalidTimestamp(String),
    #[error("record fails validation: {}", .0.join("; "))]
    InvalidRecord(Vec<String>),
}
