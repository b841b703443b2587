//! Serialization of provenance records to JSON-LD text and back.
//!
//! The wire layout follows the bundled schema.org subset for plain terms
//! and the `flux:` prefix for generator data (`flux:version`,
//! `flux:generator`, `flux:parameters`). Counts and dimensions are
//! written as JSON numbers; seeds stay strings because they may exceed
//! the 64-bit integer range. Parsing accepts numbers quoted as strings
//! and normalizes them.

use thiserror::Error;

use crate::json::{self, Json, JsonError, Number};
use crate::model::{
    Agent, AgentType, Annotation, CriterionEntry, DatasetDescriptor, EventType, Fidelity,
    GenerationParams, ProvenanceRecord, RecordOrigin, Requirement, Revision, RevisionAction,
    Scalar, ScalarMap, Split, Timestamp, TransformationEvent,
};
use crate::{Mode, Warning};

use super::context::{ContextDeclaration, ContextEntry, ContextRegistry, TermMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Canonical,
    Pretty,
}

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error(transparent)]
    Json(#[from] JsonError),
    #[error("unknown term {0:?} does not resolve under the document's @context")]
    UnknownTerm(String),
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("record fails validation: {}", .0.join("; "))]
    InvalidRecord(Vec<String>),
}

fn violation(path: impl Into<String>, message: impl Into<String>) -> CodecError {
    CodecError::SchemaViolation {
        path: path.into(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Record -> document
// ---------------------------------------------------------------------------

/// Serializes a record to JSON-LD bytes. The record must validate with
/// zero errors. Canonical style is byte-stable across runs; pretty style
/// is 2-space indented with keys in schema order.
pub fn serialize_record(record: &ProvenanceRecord, style: Style) -> Result<Vec<u8>, CodecError> {
    let report = crate::model::validate_record(record, Mode::Lenient);
    if !report.is_valid() {
        return Err(CodecError::InvalidRecord(report.error_summary()));
    }
    let doc = record_to_document(record);
    match style {
        Style::Canonical => Ok(json::canonicalize(&doc)?),
        Style::Pretty => Ok(json::pretty(&doc)),
    }
}

/// Builds the compacted JSON-LD document for a record.
pub fn record_to_document(record: &ProvenanceRecord) -> Json {
    let mut doc: Vec<(String, Json)> = Vec::new();
    if !record.context.entries.is_empty() {
        doc.push(("@context".into(), record.context.to_json()));
    }
    doc.push(("@type".into(), Json::str(record.record_type.clone())));
    doc.push(("name".into(), Json::str(record.name.clone())));
    doc.push(("creator".into(), agent_to_json(&record.creator)));
    doc.push((
        "methodOfCollection".into(),
        Json::str(record.method_of_collection.clone()),
    ));
    doc.push(("dateCreated".into(), timestamp_json(record.date_created)));
    doc.push((
        "encodingFormat".into(),
        Json::str(record.encoding_format.clone()),
    ));
    doc.push(("fidelity".into(), Json::str(record.fidelity.as_str())));
    if let Some(source) = &record.source {
        doc.push(("source".into(), Json::str(source.clone())));
    }
    if !record.capture_metadata.is_empty() {
        doc.push((
            "captureMetadata".into(),
            scalar_map_to_json(&record.capture_metadata),
        ));
    }
    if let Some(generation) = &record.generation {
        doc.push((
            "flux:version".into(),
            Json::str(generation.generator_version.clone()),
        ));
        if !generation.generator_name.is_empty() {
            doc.push((
                "flux:generator".into(),
                Json::str(generation.generator_name.clone()),
            ));
        }
        let mut params: Vec<(String, Json)> = vec![
            ("prompt".into(), Json::str(generation.prompt.clone())),
            ("seed".into(), Json::str(generation.seed.clone())),
            ("steps".into(), Json::int(generation.steps as i64)),
            ("sampler".into(), Json::str(generation.sampler.clone())),
            ("width".into(), Json::int(generation.width as i64)),
            ("height".into(), Json::int(generation.height as i64)),
        ];
        for (key, value) in &generation.extra {
            params.push((key.clone(), scalar_to_json(value)));
        }
        doc.push(("flux:parameters".into(), Json::Object(params)));
    }
    if !record.inclusion_criteria.is_empty() {
        doc.push((
            "inclusionCriteria".into(),
            Json::Array(record.inclusion_criteria.iter().map(criterion_to_json).collect()),
        ));
    }
    if !record.exclusion_criteria.is_empty() {
        doc.push((
            "exclusionCriteria".into(),
            Json::Array(record.exclusion_criteria.iter().map(criterion_to_json).collect()),
        ));
    }
    if !record.requirements.is_empty() {
        doc.push((
            "requirements".into(),
            Json::Array(record.requirements.iter().map(requirement_to_json).collect()),
        ));
    }
    if !record.annotations.is_empty() {
        doc.push((
            "annotations".into(),
            Json::Array(record.annotations.iter().map(annotation_to_json).collect()),
        ));
    }
    if !record.transformations.is_empty() {
        doc.push((
            "transformations".into(),
            Json::Array(record.transformations.iter().map(event_to_json).collect()),
        ));
    }
    if !record.revisions.is_empty() {
        doc.push((
            "revisions".into(),
            Json::Array(record.revisions.iter().map(revision_to_json).collect()),
        ));
    }
    if let Some(split) = record.split {
        doc.push(("split".into(), Json::str(split.as_str())));
    }
    if let Some(dataset) = &record.dataset {
        doc.push(("dataset".into(), dataset_to_json(dataset)));
    }
    if let Some(digest) = &record.content_digest {
        doc.push(("contentDigest".into(), Json::str(digest.clone())));
    }
    Json::Object(doc)
}

fn timestamp_json(ts: Timestamp) -> Json {
    Json::str(ts.to_string())
}

fn scalar_to_json(scalar: &Scalar) -> Json {
    match scalar {
        Scalar::Bool(b) => Json::Bool(*b),
        Scalar::Int(i) => Json::int(*i),
        Scalar::Float(f) => Json::float(*f),
        Scalar::String(s) => Json::str(s.clone()),
    }
}

fn scalar_map_to_json(map: &ScalarMap) -> Json {
    Json::Object(
        map.iter()
            .map(|(key, value)| (key.clone(), scalar_to_json(value)))
            .collect(),
    )
}

fn agent_to_json(agent: &Agent) -> Json {
    let mut members = vec![
        ("@type".into(), Json::str(agent.agent_type.type_name())),
        ("name".into(), Json::str(agent.name.clone())),
    ];
    if let Some(id) = &agent.identifier {
        members.push(("@id".into(), Json::str(id.clone())));
    }
    Json::Object(members)
}

fn requirement_to_json(requirement: &Requirement) -> Json {
    let mut members = vec![(
        "description".into(),
        Json::str(requirement.description.clone()),
    )];
    if let Some(id) = &requirement.identifier {
        members.push(("identifier".into(), Json::str(id.clone())));
    }
    Json::Object(members)
}

fn criterion_to_json(criterion: &CriterionEntry) -> Json {
    let mut members = vec![("text".into(), Json::str(criterion.text.clone()))];
    if let Some(agent) = &criterion.agent {
        members.push(("agent".into(), agent_to_json(agent)));
    }
    if let Some(date) = criterion.date {
        members.push(("date".into(), timestamp_json(date)));
    }
    Json::Object(members)
}

fn annotation_to_json(annotation: &Annotation) -> Json {
    let mut members = vec![
        ("class".into(), Json::str(annotation.class_name.clone())),
        (
            "bbox".into(),
            Json::Array(annotation.bbox.iter().map(|v| Json::float(*v)).collect()),
        ),
    ];
    if let Some(annotator) = &annotation.annotator {
        members.push(("annotator".into(), agent_to_json(annotator)));
    }
    if let Some(date) = annotation.date_annotated {
        members.push(("dateAnnotated".into(), timestamp_json(date)));
    }
    if let Some(kind) = &annotation.annotation_type {
        members.push(("annotationType".into(), Json::str(kind.clone())));
    }
    Json::Object(members)
}

fn event_to_json(event: &TransformationEvent) -> Json {
    let mut members = vec![
        ("eventType".into(), Json::str(event.event_type.as_str())),
        ("agent".into(), agent_to_json(&event.agent)),
        ("timestamp".into(), timestamp_json(event.timestamp)),
    ];
    if !event.params.is_empty() {
        members.push(("params".into(), scalar_map_to_json(&event.params)));
    }
    if let Some(note) = &event.note {
        members.push(("note".into(), Json::str(note.clone())));
    }
    if event.appended_at_version() > 0 {
        members.push((
            "appendedAtVersion".into(),
            Json::int(event.appended_at_version() as i64),
        ));
    }
    Json::Object(members)
}

fn revision_to_json(revision: &Revision) -> Json {
    let mut members = vec![
        ("version".into(), Json::int(revision.version as i64)),
        ("action".into(), Json::str(revision.action.as_str())),
    ];
    if let Some(target) = revision.target_version {
        members.push(("targetVersion".into(), Json::int(target as i64)));
    }
    members.push(("agent".into(), agent_to_json(&revision.agent)));
    members.push(("timestamp".into(), timestamp_json(revision.timestamp)));
    if let Some(note) = &revision.note {
        members.push(("note".into(), Json::str(note.clone())));
    }
    Json::Object(members)
}

fn dataset_to_json(dataset: &DatasetDescriptor) -> Json {
    let mut members = vec![("datasetId".into(), Json::str(dataset.dataset_id.clone()))];
    if !dataset.class_proportions.is_empty() {
        members.push((
            "classProportions".into(),
            Json::Object(
                dataset
                    .class_proportions
                    .iter()
                    .map(|(class, fraction)| (class.clone(), Json::float(*fraction)))
                    .collect(),
            ),
        ));
    }
    if !dataset.split_proportions.is_empty() {
        members.push((
            "splitProportions".into(),
            Json::Object(
                dataset
                    .split_proportions
                    .iter()
                    .map(|(split, fraction)| (split.clone(), Json::float(*fraction)))
                    .collect(),
            ),
        ));
    }
    Json::Object(members)
}

// ---------------------------------------------------------------------------
// Document -> record
// ---------------------------------------------------------------------------

/// Parses JSON-LD bytes into a record. Strict mode rejects duplicate
/// keys, unresolvable terms and malformed optional fields; lenient mode
/// downgrades those to warnings, dropping what it cannot keep. Missing
/// required fields are errors in both modes.
pub fn parse_record(
    bytes: &[u8],
    mode: Mode,
    registry: &ContextRegistry,
) -> Result<(ProvenanceRecord, Vec<Warning>), CodecError> {
    let (doc, json_warnings) = json::parse(bytes, mode)?;
    let (record, mut warnings) = document_to_record(&doc, mode, registry)?;
    let mut all = json_warnings;
    all.append(&mut warnings);
    Ok((record, all))
}

/// Interprets an already-parsed document as a provenance record.
pub fn document_to_record(
    doc: &Json,
    mode: Mode,
    registry: &ContextRegistry,
) -> Result<(ProvenanceRecord, Vec<Warning>), CodecError> {
    let members = doc
        .as_object()
        .ok_or_else(|| violation("$", "provenance document must be a JSON object"))?;

    let mut r = Reader {
        mode,
        warnings: Vec::new(),
    };

    let context = match doc.get("@context") {
        Some(value) => ContextDeclaration::from_json(value)
            .map_err(|e| violation("@context", e.to_string()))?,
        None => {
            r.warnings.push(Warning::new(
                "missing-context",
                "document has no @context declaration",
            ));
            ContextDeclaration::default()
        }
    };
    let active = resolve_lenient(&context, registry, &mut r.warnings);

    let record_type = match doc.get("@type") {
        Some(Json::String(t)) => t.clone(),
        Some(_) => return Err(violation("@type", "@type must be a string")),
        None => {
            r.warnings.push(Warning::new(
                "missing-type",
                "document has no @type; assuming \"ImageObject\"",
            ));
            "ImageObject".into()
        }
    };

    let mut origin = RecordOrigin::default();
    let mut transformations: Vec<TransformationEvent> = Vec::new();
    let mut revisions: Vec<Revision> = Vec::new();
    let mut content_digest: Option<String> = None;
    let mut generator_version: Option<String> = None;
    let mut generator_name: Option<String> = None;
    let mut parameters: Option<&Json> = None;

    for (key, value) in members {
        match key.as_str() {
            "@context" | "@type" => {}
            "name" => origin.name = Some(r.req_string(value, "name")?),
            "creator" => origin.creator = r.agent(value, "creator")?,
            "methodOfCollection" => {
                origin.method_of_collection = Some(r.req_string(value, "methodOfCollection")?)
            }
            "dateCreated" => origin.date_created = Some(r.req_timestamp(value, "dateCreated")?),
            "encodingFormat" => {
                origin.encoding_format = Some(r.req_string(value, "encodingFormat")?)
            }
            "fidelity" => {
                let text = r.req_string(value, "fidelity")?;
                origin.fidelity = Some(Fidelity::from_str(&text).ok_or_else(|| {
                    violation("fidelity", format!("{text:?} is not \"real\" or \"synthetic\""))
                })?);
            }
            "source" => origin.source = r.opt_string(value, "source")?,
            "captureMetadata" => {
                origin.capture_metadata = r.scalar_map(value, "captureMetadata")?
            }
            "flux:version" => generator_version = r.opt_string(value, "flux:version")?,
            "flux:generator" => generator_name = r.opt_string(value, "flux:generator")?,
            "flux:parameters" => parameters = Some(value),
            "inclusionCriteria" => {
                origin.inclusion_criteria = r.criteria(value, "inclusionCriteria")?
            }
            "exclusionCriteria" => {
                origin.exclusion_criteria = r.criteria(value, "exclusionCriteria")?
            }
            "requirements" => origin.requirements = r.requirements(value)?,
            "annotations" => origin.annotations = r.annotations(value)?,
            "transformations" => transformations = r.transformations(value)?,
            "revisions" => revisions = r.revisions(value)?,
            "split" => {
                if let Some(text) = r.opt_string(value, "split")? {
                    match Split::from_str(&text) {
                        Some(split) => origin.split = Some(split),
                        None => r.issue(
                            "split",
                            format!("{text:?} is not one of training/validation/testing"),
                        )?,
                    }
                }
            }
            "dataset" => origin.dataset = r.dataset(value)?,
            "contentDigest" => content_digest = r.opt_string(value, "contentDigest")?,
            other => r.unknown_key(other, &active)?,
        }
    }

    if generator_version.is_some() || generator_name.is_some() || parameters.is_some() {
        origin.generation = Some(r.generation(generator_version, generator_name, parameters)?);
    }

    // Required origin fields are errors in both modes.
    for (field, present) in [
        ("name", origin.name.is_some()),
        ("creator", origin.creator.is_some()),
        ("methodOfCollection", origin.method_of_collection.is_some()),
        ("dateCreated", origin.date_created.is_some()),
        ("encodingFormat", origin.encoding_format.is_some()),
        ("fidelity", origin.fidelity.is_some()),
    ] {
        if !present {
            return Err(violation(field, "required field is missing"));
        }
    }

    let record = ProvenanceRecord {
        context,
        record_type,
        name: origin.name.unwrap(),
        creator: origin.creator.unwrap(),
        method_of_collection: origin.method_of_collection.unwrap(),
        date_created: origin.date_created.unwrap(),
        encoding_format: origin.encoding_format.unwrap(),
        fidelity: origin.fidelity.unwrap(),
        source: origin.source,
        capture_metadata: origin.capture_metadata,
        generation: origin.generation,
        inclusion_criteria: origin.inclusion_criteria,
        exclusion_criteria: origin.exclusion_criteria,
        requirements: origin.requirements,
        annotations: origin.annotations,
        transformations,
        revisions,
        split: origin.split,
        dataset: origin.dataset,
        content_digest,
    };
    Ok((record, r.warnings))
}

/// Interprets a standalone JSON object as one transformation event in
/// the same wire format events use inside a record.
pub fn event_from_json(
    doc: &Json,
    mode: Mode,
) -> Result<(TransformationEvent, Vec<Warning>), CodecError> {
    let mut r = Reader {
        mode,
        warnings: Vec::new(),
    };
    let wrapped = Json::Array(vec![doc.clone()]);
    let mut events = r.transformations(&wrapped)?;
    match events.pop() {
        Some(event) => Ok((event, r.warnings)),
        None => Err(violation(
            "$",
            "the supplied JSON does not describe a usable transformation event",
        )),
    }
}

/// Resolves a declaration, downgrading unregistered context IRIs to
/// warnings so that foreign documents still parse.
fn resolve_lenient(
    declaration: &ContextDeclaration,
    registry: &ContextRegistry,
    warnings: &mut Vec<Warning>,
) -> TermMap {
    let mut active = TermMap::new();
    for entry in &declaration.entries {
        match entry {
            ContextEntry::Iri(iri) => match registry.lookup(iri) {
                Some(terms) => active.extend(terms.clone()),
                None => warnings.push(Warning::new(
                    "unknown-context",
                    format!("context {iri:?} is not registered; its terms will not resolve"),
                )),
            },
            ContextEntry::Inline(terms) => active.extend(terms.clone()),
        }
    }
    active
}

struct Reader {
    mode: Mode,
    warnings: Vec<Warning>,
}

impl Reader {
    /// A recoverable problem: strict mode errors, lenient mode records a
    /// warning and lets the caller drop the offending value.
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) -> Result<(), CodecError> {
        let (path, message) = (path.into(), message.into());
        match self.mode {
            Mode::Strict => Err(CodecError::SchemaViolation { path, message }),
            Mode::Lenient => {
                self.warnings
                    .push(Warning::new("schema", format!("{path}: {message}")));
                Ok(())
            }
        }
    }

    fn unknown_key(&mut self, key: &str, active: &TermMap) -> Result<(), CodecError> {
        let resolvable = active.contains_key(key)
            || key.starts_with('@')
            || match key.split_once(':') {
                Some((prefix, _)) => active.contains_key(prefix) || super::is_absolute_iri(key),
                None => false,
            };
        if resolvable {
            self.warnings.push(Warning::new(
                "ignored-term",
                format!("key {key:?} is not part of the provenance schema; ignored"),
            ));
            Ok(())
        } else {
            match self.mode {
                Mode::Strict => Err(CodecError::UnknownTerm(key.to_string())),
                Mode::Lenient => {
                    self.warnings.push(Warning::new(
                        "unknown-term",
                        format!("key {key:?} resolves to no IRI under the active context; ignored"),
                    ));
                    Ok(())
                }
            }
        }
    }

    /// A string in a position where failure must abort the parse.
    fn req_string(&mut self, value: &Json, path: &str) -> Result<String, CodecError> {
        match value {
            Json::String(s) => Ok(s.clone()),
            _ => Err(violation(path, "expected a string")),
        }
    }

    fn req_timestamp(&mut self, value: &Json, path: &str) -> Result<Timestamp, CodecError> {
        let text = self.req_string(value, path)?;
        Timestamp::parse(&text).map_err(|e| violation(path, e.to_string()))
    }

    fn opt_string(&mut self, value: &Json, path: &str) -> Result<Option<String>, CodecError> {
        match value {
            Json::String(s) => Ok(Some(s.clone())),
            _ => {
                self.issue(path, "expected a string")?;
                Ok(None)
            }
        }
    }

    fn opt_timestamp(&mut self, value: &Json, path: &str) -> Result<Option<Timestamp>, CodecError> {
        let Some(text) = self.opt_string(value, path)? else {
            return Ok(None);
        };
        match Timestamp::parse(&text) {
            Ok(ts) => Ok(Some(ts)),
            Err(e) => {
                self.issue(path, e.to_string())?;
                Ok(None)
            }
        }
    }

    fn scalar(&mut self, value: &Json, path: &str) -> Result<Option<Scalar>, CodecError> {
        match value {
            Json::Bool(b) => Ok(Some(Scalar::Bool(*b))),
            Json::Number(Number::Int(i)) => Ok(Some(Scalar::Int(*i))),
            Json::Number(Number::Float(f)) => Ok(Some(Scalar::Float(*f))),
            Json::String(s) => Ok(Some(Scalar::String(s.clone()))),
            _ => {
                self.issue(path, "expected a scalar value")?;
                Ok(None)
            }
        }
    }

    fn scalar_map(&mut self, value: &Json, path: &str) -> Result<ScalarMap, CodecError> {
        let mut map = ScalarMap::new();
        match value.as_object() {
            Some(members) => {
                for (key, member) in members {
                    if let Some(scalar) = self.scalar(member, format!("{path}.{key}"))? {
                        map.insert(key.clone(), scalar);
                    }
                }
            }
            None => self.issue(path, "expected an object of scalars")?,
        }
        Ok(map)
    }

    /// A number that may arrive quoted as a string.
    fn coerced_f64(&mut self, value: &Json, path: &str) -> Result<Option<f64>, CodecError> {
        match value {
            Json::Number(n) => Ok(Some(n.as_f64())),
            Json::String(s) if parse_numeric(s).is_some() => Ok(parse_numeric(s)),
            _ => {
                self.issue(path, "expected a number")?;
                Ok(None)
            }
        }
    }

    fn coerced_u32(&mut self, value: &Json, path: &str) -> Result<Option<u32>, CodecError> {
        if let Some(f) = self.coerced_f64(value, path)? {
            if f.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&f) {
                return Ok(Some(f as u32));
            }
            self.issue(path, format!("{f} is not a non-negative 32-bit integer"))?;
        }
        Ok(None)
    }

    fn agent(&mut self, value: &Json, path: &str) -> Result<Option<Agent>, CodecError> {
        let Some(_) = value.as_object() else {
            self.issue(path, "expected an agent object")?;
            return Ok(None);
        };
        let agent_type = match value.get("@type") {
            Some(Json::String(name)) => match AgentType::from_type_name(name) {
                Some(agent_type) => agent_type,
                None => {
                    self.issue(
                        format!("{path}.@type"),
                        format!("{name:?} is not a known agent type"),
                    )?;
                    AgentType::Person
                }
            },
            Some(_) => {
                self.issue(format!("{path}.@type"), "expected a string")?;
                AgentType::Person
            }
            None => {
                self.warnings.push(Warning::new(
                    "schema",
                    format!("{path}: agent has no @type; assuming \"Person\""),
                ));
                AgentType::Person
            }
        };
        let name = match value.get("name") {
            Some(Json::String(s)) => s.clone(),
            _ => {
                self.issue(format!("{path}.name"), "agent requires a name string")?;
                return Ok(None);
            }
        };
        let identifier = match value.get("@id") {
            Some(id) => self.opt_string(id, format!("{path}.@id"))?,
            None => None,
        };
        Ok(Some(Agent {
            agent_type,
            name,
            identifier,
        }))
    }

    fn generation(
        &mut self,
        generator_version: Option<String>,
        generator_name: Option<String>,
        parameters: Option<&Json>,
    ) -> Result<GenerationParams, CodecError> {
        let mut generation = GenerationParams {
            generator_name: generator_name.unwrap_or_default(),
            generator_version: generator_version.unwrap_or_default(),
            prompt: String::new(),
            seed: String::new(),
            steps: 0,
            sampler: String::new(),
            width: 0,
            height: 0,
            extra: ScalarMap::new(),
        };
        let Some(parameters) = parameters else {
            self.issue("flux:parameters", "generation data lacks flux:parameters")?;
            return Ok(generation);
        };
        let Some(members) = parameters.as_object() else {
            self.issue("flux:parameters", "expected an object")?;
            return Ok(generation);
        };
        let mut seen_steps = false;
        let mut seen_width = false;
        let mut seen_height = false;
        for (key, value) in members {
            let path = format!("flux:parameters.{key}");
            match key.as_str() {
                "prompt" => generation.prompt = self.opt_string(value, &path)?.unwrap_or_default(),
                "sampler" => {
                    generation.sampler = self.opt_string(value, &path)?.unwrap_or_default()
                }
                "seed" => generation.seed = self.seed(value, &path)?,
                "steps" => {
                    seen_steps = true;
                    generation.steps = self.coerced_u32(value, &path)?.unwrap_or(0);
                }
                "width" => {
                    seen_width = true;
                    generation.width = self.coerced_u32(value, &path)?.unwrap_or(0);
                }
                "height" => {
                    seen_height = true;
                    generation.height = self.coerced_u32(value, &path)?.unwrap_or(0);
                }
                _ => {
                    if let Some(scalar) = self.scalar(value, &path)? {
                        generation.extra.insert(key.clone(), scalar);
                    }
                }
            }
        }
        for (field, seen) in [
            ("steps", seen_steps),
            ("width", seen_width),
            ("height", seen_height),
        ] {
            if !seen {
                self.issue(
                    format!("flux:parameters.{field}"),
                    "generation parameter is missing",
                )?;
            }
        }
        Ok(generation)
    }

    fn seed(&mut self, value: &Json, path: &str) -> Result<String, CodecError> {
        match value {
            Json::String(s) => Ok(s.clone()),
            Json::Number(Number::Int(i)) if *i >= 0 => Ok(i.to_string()),
            Json::Number(Number::Float(f)) if f.fract() == 0.0 && *f >= 0.0 && *f <= i64::MAX as f64 => {
                Ok(format!("{}", *f as i64))
            }
            _ => {
                self.issue(path, "expected a decimal-string seed")?;
                Ok(String::new())
            }
        }
    }

    fn criteria(&mut self, value: &Json, path: &str) -> Result<Vec<CriterionEntry>, CodecError> {
        let Some(items) = value.as_array() else {
            self.issue(path, "expected an array of criterion entries")?;
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("{path}[{i}]");
            let Some(_) = item.as_object() else {
                self.issue(&path, "expected a criterion object")?;
                continue;
            };
            let Some(text) = item.get("text").and_then(Json::as_str) else {
                self.issue(format!("{path}.text"), "criterion requires a text string")?;
                continue;
            };
            let agent = match item.get("agent") {
                Some(agent) => self.agent(agent, format!("{path}.agent"))?,
                None => None,
            };
            let date = match item.get("date") {
                Some(date) => self.opt_timestamp(date, format!("{path}.date"))?,
                None => None,
            };
            out.push(CriterionEntry {
                text: text.to_string(),
                agent,
                date,
            });
        }
        Ok(out)
    }

    fn requirements(&mut self, value: &Json) -> Result<Vec<Requirement>, CodecError> {
        let Some(items) = value.as_array() else {
            self.issue("requirements", "expected an array of requirement objects")?;
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("requirements[{i}]");
            let Some(description) = item.get("description").and_then(Json::as_str) else {
                self.issue(
                    format!("{path}.description"),
                    "requirement needs a description string",
                )?;
                continue;
            };
            let identifier = match item.get("identifier") {
                Some(id) => self.opt_string(id, format!("{path}.identifier"))?,
                None => None,
            };
            out.push(Requirement {
                description: description.to_string(),
                identifier,
            });
        }
        Ok(out)
    }

    fn annotations(&mut self, value: &Json) -> Result<Vec<Annotation>, CodecError> {
        let Some(items) = value.as_array() else {
            self.issue("annotations", "expected an array of annotation objects")?;
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("annotations[{i}]");
            let Some(class_name) = item.get("class").and_then(Json::as_str) else {
                self.issue(format!("{path}.class"), "annotation needs a class string")?;
                continue;
            };
            let Some(bbox_items) = item.get("bbox").and_then(Json::as_array) else {
                self.issue(format!("{path}.bbox"), "annotation needs a bbox array")?;
                continue;
            };
            if bbox_items.len() != 4 {
                self.issue(
                    format!("{path}.bbox"),
                    format!("bbox needs 4 coordinates, found {}", bbox_items.len()),
                )?;
                continue;
            }
            let mut bbox = [0.0f64; 4];
            let mut ok = true;
            for (j, coord) in bbox_items.iter().enumerate() {
                match self.coerced_f64(coord, format!("{path}.bbox[{j}]"))? {
                    Some(v) => bbox[j] = v,
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let annotator = match item.get("annotator") {
                Some(agent) => self.agent(agent, format!("{path}.annotator"))?,
                None => None,
            };
            let date_annotated = match item.get("dateAnnotated") {
                Some(date) => self.opt_timestamp(date, format!("{path}.dateAnnotated"))?,
                None => None,
            };
            let annotation_type = match item.get("annotationType") {
                Some(kind) => self.opt_string(kind, format!("{path}.annotationType"))?,
                None => None,
            };
            out.push(Annotation {
                class_name: class_name.to_string(),
                bbox,
                annotator,
                date_annotated,
                annotation_type,
            });
        }
        Ok(out)
    }

    fn transformations(&mut self, value: &Json) -> Result<Vec<TransformationEvent>, CodecError> {
        let Some(items) = value.as_array() else {
            self.issue("transformations", "expected an array of events")?;
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("transformations[{i}]");
            let event_type = match item.get("eventType").and_then(Json::as_str) {
                Some(text) => match EventType::from_str(text) {
                    Some(event_type) => event_type,
                    None => {
                        self.issue(
                            format!("{path}.eventType"),
                            format!("{text:?} is not a known event type; using \"other\""),
                        )?;
                        EventType::Other
                    }
                },
                None => {
                    self.issue(format!("{path}.eventType"), "event needs an eventType string")?;
                    continue;
                }
            };
            let Some(agent) = (match item.get("agent") {
                Some(agent) => self.agent(agent, format!("{path}.agent"))?,
                None => {
                    self.issue(format!("{path}.agent"), "event needs an agent")?;
                    None
                }
            }) else {
                continue;
            };
            let Some(timestamp) = (match item.get("timestamp") {
                Some(ts) => self.opt_timestamp(ts, format!("{path}.timestamp"))?,
                None => {
                    self.issue(format!("{path}.timestamp"), "event needs a timestamp")?;
                    None
                }
            }) else {
                continue;
            };
            let params = match item.get("params") {
                Some(params) => self.scalar_map(params, format!("{path}.params"))?,
                None => ScalarMap::new(),
            };
            let note = match item.get("note") {
                Some(note) => self.opt_string(note, format!("{path}.note"))?,
                None => None,
            };
            let mut event = TransformationEvent::new(event_type, agent, timestamp)
                .with_params(params);
            if let Some(note) = note {
                event = event.with_note(note);
            }
            if let Some(version) = item.get("appendedAtVersion") {
                if let Some(v) = self.coerced_u32(version, format!("{path}.appendedAtVersion"))? {
                    event.set_appended_at_version(v);
                }
            }
            out.push(event);
        }
        Ok(out)
    }

    fn revisions(&mut self, value: &Json) -> Result<Vec<Revision>, CodecError> {
        let Some(items) = value.as_array() else {
            self.issue("revisions", "expected an array of revisions")?;
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("revisions[{i}]");
            let Some(version) = (match item.get("version") {
                Some(version) => self.coerced_u32(version, format!("{path}.version"))?,
                None => {
                    self.issue(format!("{path}.version"), "revision needs a version")?;
                    None
                }
            }) else {
                continue;
            };
            let action = match item.get("action").and_then(Json::as_str) {
                Some(text) => match RevisionAction::from_str(text) {
                    Some(action) => action,
                    None => {
                        self.issue(
                            format!("{path}.action"),
                            format!("{text:?} is not a known revision action"),
                        )?;
                        continue;
                    }
                },
                None => {
                    self.issue(format!("{path}.action"), "revision needs an action string")?;
                    continue;
                }
            };
            let target_version = match item.get("targetVersion") {
                Some(target) => self.coerced_u32(target, format!("{path}.targetVersion"))?,
                None => None,
            };
            let Some(agent) = (match item.get("agent") {
                Some(agent) => self.agent(agent, format!("{path}.agent"))?,
                None => {
                    self.issue(format!("{path}.agent"), "revision needs an agent")?;
                    None
                }
            }) else {
                continue;
            };
            let Some(timestamp) = (match item.get("timestamp") {
                Some(ts) => self.opt_timestamp(ts, format!("{path}.timestamp"))?,
                None => {
                    self.issue(format!("{path}.timestamp"), "revision needs a timestamp")?;
                    None
                }
            }) else {
                continue;
            };
            let note = match item.get("note") {
                Some(note) => self.opt_string(note, format!("{path}.note"))?,
                None => None,
            };
            out.push(Revision {
                version,
                action,
                target_version,
                agent,
                timestamp,
                note,
            });
        }
        Ok(out)
    }

    fn dataset(&mut self, value: &Json) -> Result<Option<DatasetDescriptor>, CodecError> {
        let Some(members) = value.as_object() else {
            self.issue("dataset", "expected a dataset object")?;
            return Ok(None);
        };
        let mut dataset = DatasetDescriptor::default();
        for (key, member) in members {
            match key.as_str() {
                "datasetId" => {
                    dataset.dataset_id = self
                        .opt_string(member, "dataset.datasetId")?
                        .unwrap_or_default()
                }
                "classProportions" => {
                    dataset.class_proportions =
                        self.proportions(member, "dataset.classProportions")?
                }
                "splitProportions" => {
                    dataset.split_proportions =
                        self.proportions(member, "dataset.splitProportions")?
                }
                other => self.issue(
                    format!("dataset.{other}"),
                    "unknown dataset descriptor field",
                )?,
            }
        }
        Ok(Some(dataset))
    }

    fn proportions(
        &mut self,
        value: &Json,
        path: &str,
    ) -> Result<std::collections::BTreeMap<String, f64>, CodecError> {
        let mut map = std::collections::BTreeMap::new();
        match value.as_object() {
            Some(members) => {
                for (key, member) in members {
                    if let Some(f) = self.coerced_f64(member, format!("{path}.{key}"))? {
                        map.insert(key.clone(), f);
                    }
                }
            }
            None => self.issue(path, "expected an object of fractions")?,
        }
        Ok(map)
    }
}

/// Parses a string that looks like a number: digits, sign, decimal point
/// or exponent, evaluating to a finite double.
pub fn parse_numeric(s: &str) -> Option<f64> {
    if s.is_empty()
        || !s
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
    {
        return None;
    }
    s.parse::<f64>().ok().filter(|f| f.is_finite())
}
