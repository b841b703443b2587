//! The provenance record and its append-only operations.
//!
//! A record covers three areas: origins (who made the asset, how, when),
//! transformations (the ordered preprocessing/labeling log) and revisions
//! (dataset-lifecycle versioning including reverts). Records are values:
//! every operation returns a new record and leaves its input untouched.

use std::collections::BTreeMap;

use crate::jsonld::ContextDeclaration;
use crate::{Mode, Warning};

use super::timestamp::Timestamp;
use super::ModelError;

/// A primitive metadata value: capture settings, transformation
/// parameters and generator extras all carry these.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    String(String),
}

pub type ScalarMap = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentType {
    Person,
    Organization,
    Software,
}

impl AgentType {
    /// The `@type` value used on the wire.
    pub fn type_name(self) -> &'static str {
        match self {
            AgentType::Person => "Person",
            AgentType::Organization => "Organization",
            AgentType::Software => "SoftwareApplication",
        }
    }

    pub fn from_type_name(name: &str) -> Option<AgentType> {
        match name {
            "Person" => Some(AgentType::Person),
            "Organization" => Some(AgentType::Organization),
            "SoftwareApplication" => Some(AgentType::Software),
            _ => None,
        }
    }
}

/// Someone or something that acted on the asset.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub agent_type: AgentType,
    pub name: String,
    /// Optional absolute IRI identifying the agent.
    pub identifier: Option<String>,
}

impl Agent {
    pub fn person(name: impl Into<String>) -> Agent {
        Agent {
            agent_type: AgentType::Person,
            name: name.into(),
            identifier: None,
        }
    }

    pub fn software(name: impl Into<String>) -> Agent {
        Agent {
            agent_type: AgentType::Software,
            name: name.into(),
            identifier: None,
        }
    }
}

/// Whether the image was captured or generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    Real,
    Synthetic,
}

impl Fidelity {
    pub fn as_str(self) -> &'static str {
        match self {
            Fidelity::Real => "real",
            Fidelity::Synthetic => "synthetic",
        }
    }

    pub fn from_str(s: &str) -> Option<Fidelity> {
        match s {
            "real" => Some(Fidelity::Real),
            "synthetic" => Some(Fidelity::Synthetic),
            _ => None,
        }
    }
}

/// Generator settings for synthetic assets.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationParams {
    /// Generator name; empty means "unnamed" and is omitted on the wire.
    pub generator_name: String,
    pub generator_version: String,
    pub prompt: String,
    /// Kept as a decimal string: seeds may exceed 64-bit integer range.
    pub seed: String,
    pub steps: u32,
    pub sampler: String,
    pub width: u32,
    pub height: u32,
    pub extra: ScalarMap,
}

/// A dataset requirement the asset helps satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct Requirement {
    pub description: String,
    pub identifier: Option<String>,
}

impl Requirement {
    pub fn new(description: impl Into<String>) -> Requirement {
        Requirement {
            description: description.into(),
            identifier: None,
        }
    }
}

/// One labeled region of the image.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub class_name: String,
    /// `[x1, y1, x2, y2]` in pixel coordinates, `x1 <= x2`, `y1 <= y2`.
    pub bbox: [f64; 4],
    pub annotator: Option<Agent>,
    pub date_annotated: Option<Timestamp>,
    pub annotation_type: Option<String>,
}

/// An inclusion or exclusion criterion applied during collection.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionEntry {
    pub text: String,
    pub agent: Option<Agent>,
    pub date: Option<Timestamp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventType {
    Cleaning,
    Denoising,
    Resizing,
    Cropping,
    Normalization,
    Labeling,
    FeatureSelection,
    Other,
}

impl EventType {
    pub fn as_str(self) -> &'static str {
        match self {
            EventType::Cleaning => "cleaning",
            EventType::Denoising => "denoising",
            EventType::Resizing => "resizing",
            EventType::Cropping => "cropping",
            EventType::Normalization => "normalization",
            EventType::Labeling => "labeling",
            EventType::FeatureSelection => "feature-selection",
            EventType::Other => "other",
        }
    }

    pub fn from_str(s: &str) -> Option<EventType> {
        match s {
            "cleaning" => Some(EventType::Cleaning),
            "denoising" => Some(EventType::Denoising),
            "resizing" => Some(EventType::Resizing),
            "cropping" => Some(EventType::Cropping),
            "normalization" => Some(EventType::Normalization),
            "labeling" => Some(EventType::Labeling),
            "feature-selection" => Some(EventType::FeatureSelection),
            "other" => Some(EventType::Other),
            _ => None,
        }
    }
}

/// One ordered processing step applied to the asset.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformationEvent {
    pub event_type: EventType,
    pub agent: Agent,
    pub timestamp: Timestamp,
    pub params: ScalarMap,
    pub note: Option<String>,
    /// The revision version that was current when the event was appended;
    /// 0 for events appended before any revision existed. Revision replay
    /// uses this to decide what a revert discards.
    appended_at_version: u32,
}

impl TransformationEvent {
    pub fn new(event_type: EventType, agent: Agent, timestamp: Timestamp) -> TransformationEvent {
        TransformationEvent {
            event_type,
            agent,
            timestamp,
            params: ScalarMap::new(),
            note: None,
            appended_at_version: 0,
        }
    }

    pub fn with_params(mut self, params: ScalarMap) -> TransformationEvent {
        self.params = params;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> TransformationEvent {
        self.note = Some(note.into());
        self
    }

    pub fn appended_at_version(&self) -> u32 {
        self.appended_at_version
    }

    pub(crate) fn set_appended_at_version(&mut self, version: u32) {
        self.appended_at_version = version;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevisionAction {
    AddData,
    RemoveData,
    Modify,
    Revert,
}

impl RevisionAction {
    pub fn as_str(self) -> &'static str {
        match self {
            RevisionAction::AddData => "add-data",
            RevisionAction::RemoveData => "remove-data",
            RevisionAction::Modify => "modify",
            RevisionAction::Revert => "revert",
        }
    }

    pub fn from_str(s: &str) -> Option<RevisionAction> {
        match s {
            "add-data" => Some(RevisionAction::AddData),
            "remove-data" => Some(RevisionAction::RemoveData),
            "modify" => Some(RevisionAction::Modify),
            "revert" => Some(RevisionAction::Revert),
            _ => None,
        }
    }
}

/// One dataset-lifecycle entry. Versions are assigned by
/// [`ProvenanceRecord::with_revision`] and are always `1..=N` with no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct Revision {
    pub version: u32,
    pub action: RevisionAction,
    /// Required iff `action == Revert`; names the version to roll back to.
    pub target_version: Option<u32>,
    pub agent: Agent,
    pub timestamp: Timestamp,
    pub note: Option<String>,
}

/// Everything of a [`Revision`] except the version number, which the
/// record assigns on append.
#[derive(Debug, Clone)]
pub struct RevisionRequest {
    pub action: RevisionAction,
    pub target_version: Option<u32>,
    pub agent: Agent,
    pub timestamp: Timestamp,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Split {
    Training,
    Validation,
    Testing,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Training => "training",
            Split::Validation => "validation",
            Split::Testing => "testing",
        }
    }

    pub fn from_str(s: &str) -> Option<Split> {
        match s {
            "training" => Some(Split::Training),
            "validation" => Some(Split::Validation),
            "testing" => Some(Split::Testing),
            _ => None,
        }
    }
}

/// Dataset-level facts duplicated into each member image so instance
/// files stay self-describing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetDescriptor {
    pub dataset_id: String,
    /// class → fraction; fractions must sum to 1.
    pub class_proportions: BTreeMap<String, f64>,
    /// split name → fraction.
    pub split_proportions: BTreeMap<String, f64>,
}

/// The full per-image provenance document.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvenanceRecord {
    pub context: ContextDeclaration,
    /// Fixed to `"ImageObject"`.
    pub record_type: String,
    pub name: String,
    pub creator: Agent,
    pub method_of_collection: String,
    pub date_created: Timestamp,
    pub encoding_format: String,
    pub fidelity: Fidelity,
    pub source: Option<String>,
    pub capture_metadata: ScalarMap,
    pub generation: Option<GenerationParams>,
    pub inclusion_criteria: Vec<CriterionEntry>,
    pub exclusion_criteria: Vec<CriterionEntry>,
    pub requirements: Vec<Requirement>,
    pub annotations: Vec<Annotation>,
    pub transformations: Vec<TransformationEvent>,
    pub revisions: Vec<Revision>,
    pub split: Option<Split>,
    pub dataset: Option<DatasetDescriptor>,
    /// `"sha256:<64 lowercase hex>"` over the provenance-stripped file.
    pub content_digest: Option<String>,
}

/// Origin-field bundle accepted by [`ProvenanceRecord::from_origin`].
/// `name`, `creator`, `method_of_collection`, `date_created`,
/// `encoding_format` and `fidelity` are required; the rest may stay empty.
#[derive(Debug, Clone, Default)]
pub struct RecordOrigin {
    pub name: Option<String>,
    pub creator: Option<Agent>,
    pub method_of_collection: Option<String>,
    pub date_created: Option<Timestamp>,
    pub encoding_format: Option<String>,
    pub fidelity: Option<Fidelity>,
    pub source: Option<String>,
    pub capture_metadata: ScalarMap,
    pub generation: Option<GenerationParams>,
    pub inclusion_criteria: Vec<CriterionEntry>,
    pub exclusion_criteria: Vec<CriterionEntry>,
    pub requirements: Vec<Requirement>,
    pub annotations: Vec<Annotation>,
    pub split: Option<Split>,
    pub dataset: Option<DatasetDescriptor>,
}

impl ProvenanceRecord {
    /// Builds a fresh record from its origin fields. The result has empty
    /// transformation and revision logs and validates without errors.
    pub fn from_origin(origin: RecordOrigin) -> Result<ProvenanceRecord, ModelError> {
        let name = origin
            .name
            .ok_or(ModelError::MissingField("name"))?;
        let creator = origin
            .creator
            .ok_or(ModelError::MissingField("creator"))?;
        let method_of_collection = origin
            .method_of_collection
            .ok_or(ModelError::MissingField("methodOfCollection"))?;
        let date_created = origin
            .date_created
            .ok_or(ModelError::MissingField("dateCreated"))?;
        let encoding_format = origin
            .encoding_format
            .ok_or(ModelError::MissingField("encodingFormat"))?;
        let fidelity = origin
            .fidelity
            .ok_or(ModelError::MissingField("fidelity"))?;

        match (fidelity, origin.generation.is_some()) {
            (Fidelity::Synthetic, false) => {
                return Err(ModelError::FidelityMismatch(
                    "synthetic records require generation parameters".into(),
                ))
            }
            (Fidelity::Real, true) => {
                return Err(ModelError::FidelityMismatch(
                    "real records must not carry generation parameters".into(),
                ))
            }
            _ => {}
        }

        let record = ProvenanceRecord {
            context: ContextDeclaration::default_for(origin.generation.is_some()),
            record_type: "ImageObject".into(),
            name,
            creator,
            method_of_collection,
            date_created,
            encoding_format,
            fidelity,
            source: origin.source,
            capture_metadata: origin.capture_metadata,
            generation: origin.generation,
            inclusion_criteria: origin.inclusion_criteria,
            exclusion_criteria: origin.exclusion_criteria,
            requirements: origin.requirements,
            annotations: origin.annotations,
            transformations: Vec::new(),
            revisions: Vec::new(),
            split: origin.split,
            dataset: origin.dataset,
            content_digest: None,
        };

        let report = super::validate::validate_record(&record, Mode::Lenient);
        if !report.is_valid() {
            return Err(ModelError::InvalidRecord(report.error_summary()));
        }
        Ok(record)
    }

    /// The revision version currently in effect: the newest revision's
    /// version, or 0 when the record has never been revised.
    pub fn current_version(&self) -> u32 {
        self.revisions.last().map(|r| r.version).unwrap_or(0)
    }

    /// Appends a transformation event, tagging it with the current
    /// revision version. Events must not move backwards in time; in
    /// strict mode a regression is an error, in lenient mode a warning.
    pub fn with_transformation(
        &self,
        mut event: TransformationEvent,
        mode: Mode,
    ) -> Result<(ProvenanceRecord, Vec<Warning>), ModelError> {
        let mut warnings = Vec::new();
        if let Some(last) = self.transformations.last() {
            if event.timestamp < last.timestamp {
                match mode {
                    Mode::Strict => {
                        return Err(ModelError::TimestampRegression {
                            last: last.timestamp.to_string(),
                            next: event.timestamp.to_string(),
                        })
                    }
                    Mode::Lenient => warnings.push(Warning::new(
                        "timestamp-regression",
                        format!(
                            "event at {} precedes the previous event at {}",
                            event.timestamp, last.timestamp
                        ),
                    )),
                }
            }
        }
        event.set_appended_at_version(self.current_version());
        let mut next = self.clone();
        next.transformations.push(event);
        Ok((next, warnings))
    }

    /// Appends a revision, assigning the next version number. Revert
    /// requests must name an existing version.
    pub fn with_revision(&self, request: RevisionRequest) -> Result<ProvenanceRecord, ModelError> {
        let version = self.current_version() + 1;
        let target_version = match request.action {
            RevisionAction::Revert => {
                let target = request
                    .target_version
                    .ok_or(ModelError::MissingField("targetVersion"))?;
                if !self.revisions.iter().any(|r| r.version == target) {
                    return Err(ModelError::UnknownTargetVersion {
                        target,
                        latest: self.current_version(),
                    });
                }
                Some(target)
            }
            _ => {
                if request.target_version.is_some() {
                    return Err(ModelError::UnexpectedTargetVersion(
                        request.action.as_str(),
                    ));
                }
                None
            }
        };
        let mut next = self.clone();
        next.revisions.push(Revision {
            version,
            action: request.action,
            target_version,
            agent: request.agent,
            timestamp: request.timestamp,
            note: request.note,
        });
        Ok(next)
    }

    /// Replays the revision log and returns the record as it effectively
    /// stands: a revert to version `k` discards every transformation that
    /// was appended while a revision newer than `k` was current. The
    /// input record is left untouched and the result is a fixed point of
    /// this operation.
    pub fn effective_view(&self) -> Result<ProvenanceRecord, ModelError> {
        let report = super::validate::validate_record(self, Mode::Lenient);
        if !report.is_valid() {
            return Err(ModelError::InvalidRecord(report.error_summary()));
        }

        let mut effective: Vec<TransformationEvent> = self
            .transformations
            .iter()
            .filter(|e| e.appended_at_version == 0)
            .cloned()
            .collect();
        for revision in &self.revisions {
            if revision.action == RevisionAction::Revert {
                let target = revision.target_version.expect("validated revert target");
                effective.retain(|e| e.appended_at_version <= target);
            }
            effective.extend(
                self.transformations
                    .iter()
                    .filter(|e| e.appended_at_version == revision.version)
                    .cloned(),
            );
        }

        let mut resolved = self.clone();
        resolved.transformations = effective;
        Ok(resolved)
    }
}
