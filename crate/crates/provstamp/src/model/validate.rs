//! Record validation: every violated invariant becomes a report entry.

use crate::json::Json;
use crate::jsonld::is_absolute_iri;
use crate::model::{ProvenanceRecord, RevisionAction, Split};
use crate::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub path: String,
}

/// The outcome of validating a record. An empty violation list means the
/// record is valid; warnings alone leave it valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.error_count() == 0
    }

    pub fn error_count(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
            .count()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn error_summary(&self) -> Vec<String> {
        self.errors()
            .map(|v| format!("{} at {}: {}", v.code, v.path, v.message))
            .collect()
    }

    pub fn to_json(&self) -> Json {
        let violations = Json::Array(
            self.violations
                .iter()
                .map(|v| {
                    Json::Object(vec![
                        ("severity".into(), Json::str(v.severity.as_str())),
                        ("code".into(), Json::str(v.code.clone())),
                        ("message".into(), Json::str(v.message.clone())),
                        ("path".into(), Json::str(v.path.clone())),
                    ])
                })
                .collect(),
        );
        Json::Object(vec![("violations".into(), violations)])
    }
}

struct Checker {
    mode: Mode,
    violations: Vec<Violation>,
}

impl Checker {
    fn error(&mut self, code: &str, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Error,
            code: code.into(),
            message: message.into(),
            path: path.into(),
        });
    }

    fn warn(&mut self, code: &str, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Warning,
            code: code.into(),
            message: message.into(),
            path: path.into(),
        });
    }

    /// A warning that strict mode promotes to an error.
    fn ordering(&mut self, code: &str, path: impl Into<String>, message: impl Into<String>) {
        match self.mode {
            Mode::Strict => self.error(code, path, message),
            Mode::Lenient => self.warn(code, path, message),
        }
    }

    fn check_scalars(&mut self, map: &crate::model::ScalarMap, path: &str) {
        for (key, value) in map {
            if let crate::model::Scalar::Float(f) = value {
                if !f.is_finite() {
                    self.error(
                        "non-finite",
                        format!("{path}.{key}"),
                        "metadata values must be finite numbers",
                    );
                }
            }
        }
    }

    fn check_agent(&mut self, agent: &crate::model::Agent, path: &str) {
        if agent.name.is_empty() {
            self.error("empty-field", format!("{path}.name"), "agent name is empty");
        }
        if let Some(id) = &agent.identifier {
            if !is_absolute_iri(id) {
                self.warn(
                    "agent-identifier",
                    format!("{path}.identifier"),
                    format!("{id:?} is not an absolute IRI"),
                );
            }
        }
    }
}

/// Validates every invariant of the record and its contained types.
/// Strict mode promotes transformation-ordering warnings to errors.
pub fn validate_record(record: &ProvenanceRecord, mode: Mode) -> ValidationReport {
    let mut c = Checker {
        mode,
        violations: Vec::new(),
    };

    if record.record_type != "ImageObject" {
        c.error(
            "record-type",
            "@type",
            format!("expected \"ImageObject\", found {:?}", record.record_type),
        );
    }
    if record.name.is_empty() {
        c.error("empty-field", "name", "name is empty");
    }
    if record.method_of_collection.is_empty() {
        c.error("empty-field", "methodOfCollection", "methodOfCollection is empty");
    }
    if record.encoding_format.is_empty() {
        c.error("empty-field", "encodingFormat", "encodingFormat is empty");
    }
    c.check_agent(&record.creator, "creator");

    for (i, entry) in record.context.entries.iter().enumerate() {
        use crate::jsonld::ContextEntry;
        let path = format!("@context[{i}]");
        match entry {
            ContextEntry::Iri(iri) => {
                if !is_absolute_iri(iri) {
                    c.error("relative-iri", path, format!("{iri:?} is not an absolute IRI"));
                }
            }
            ContextEntry::Inline(terms) => {
                for (term, iri) in terms {
                    if term.is_empty() {
                        c.error("empty-term", path.clone(), "inline context term is empty");
                    } else if !is_absolute_iri(iri) {
                        c.error(
                            "relative-iri",
                            format!("{path}.{term}"),
                            format!("{iri:?} is not an absolute IRI"),
                        );
                    }
                }
            }
        }
    }

    match (record.fidelity, record.generation.as_ref()) {
        (crate::model::Fidelity::Synthetic, None) => c.error(
            "fidelity-mismatch",
            "generation",
            "synthetic records require generation parameters",
        ),
        (crate::model::Fidelity::Real, Some(_)) => c.error(
            "fidelity-mismatch",
            "generation",
            "real records must not carry generation parameters",
        ),
        _ => {}
    }

    if let Some(generation) = &record.generation {
        if generation.steps < 1 {
            c.error("out-of-range", "generation.steps", "steps must be at least 1");
        }
        if generation.width < 1 {
            c.error("out-of-range", "generation.width", "width must be at least 1");
        }
        if generation.height < 1 {
            c.error("out-of-range", "generation.height", "height must be at least 1");
        }
        if generation.seed.is_empty() || !generation.seed.bytes().all(|b| b.is_ascii_digit()) {
            c.error(
                "bad-seed",
                "generation.seed",
                format!("seed {:?} is not a non-empty decimal string", generation.seed),
            );
        }
        for reserved in ["prompt", "seed", "steps", "sampler", "width", "height"] {
            if generation.extra.contains_key(reserved) {
                c.error(
                    "reserved-key",
                    format!("generation.extra.{reserved}"),
                    "extra generation parameters must not shadow the fixed ones",
                );
            }
        }
        c.check_scalars(&generation.extra, "flux:parameters");
    }
    c.check_scalars(&record.capture_metadata, "captureMetadata");

    for (i, criterion) in record
        .inclusion_criteria
        .iter()
        .map(|e| ("inclusionCriteria", e))
        .chain(record.exclusion_criteria.iter().map(|e| ("exclusionCriteria", e)))
        .enumerate()
    {
        let (field, entry) = criterion;
        if entry.text.is_empty() {
            c.error("empty-field", format!("{field}[{i}].text"), "criterion text is empty");
        }
        if let Some(agent) = &entry.agent {
            c.check_agent(agent, &format!("{field}[{i}].agent"));
        }
    }

    for (i, requirement) in record.requirements.iter().enumerate() {
        if requirement.description.is_empty() {
            c.error(
                "empty-field",
                format!("requirements[{i}].description"),
                "requirement description is empty",
            );
        }
    }

    for (i, annotation) in record.annotations.iter().enumerate() {
        if annotation.class_name.is_empty() {
            c.error(
                "empty-field",
                format!("annotations[{i}].class"),
                "annotation class is empty",
            );
        }
        let [x1, y1, x2, y2] = annotation.bbox;
        if !annotation.bbox.iter().all(|v| v.is_finite()) {
            c.error(
                "bad-bbox",
                format!("annotations[{i}].bbox"),
                "bbox coordinates must be finite numbers",
            );
        } else if x1 > x2 || y1 > y2 {
            c.error(
                "bad-bbox",
                format!("annotations[{i}].bbox"),
                format!("bbox [{x1}, {y1}, {x2}, {y2}] must satisfy x1 <= x2 and y1 <= y2"),
            );
        }
        if let Some(agent) = &annotation.annotator {
            c.check_agent(agent, &format!("annotations[{i}].annotator"));
        }
    }

    let current_version = record.current_version();
    for (i, event) in record.transformations.iter().enumerate() {
        c.check_agent(&event.agent, &format!("transformations[{i}].agent"));
        c.check_scalars(&event.params, &format!("transformations[{i}].params"));
        if i > 0 && event.timestamp < record.transformations[i - 1].timestamp {
            c.ordering(
                "transformation-order",
                format!("transformations[{i}].timestamp"),
                format!(
                    "timestamp {} precedes the previous event at {}",
                    event.timestamp,
                    record.transformations[i - 1].timestamp
                ),
            );
        }
        if event.appended_at_version() > current_version {
            c.error(
                "bad-attribution",
                format!("transformations[{i}]"),
                format!(
                    "event is attributed to revision version {} but the record only reaches {}",
                    event.appended_at_version(),
                    current_version
                ),
            );
        }
    }

    for (i, revision) in record.revisions.iter().enumerate() {
        let expected = (i + 1) as u32;
        if revision.version != expected {
            c.error(
                "version-gap",
                format!("revisions[{i}].version"),
                format!("expected version {expected}, found {}", revision.version),
            );
        }
        c.check_agent(&revision.agent, &format!("revisions[{i}].agent"));
        match (revision.action, revision.target_version) {
            (RevisionAction::Revert, None) => c.error(
                "missing-target",
                format!("revisions[{i}].targetVersion"),
                "revert revisions must name a target version",
            ),
            (RevisionAction::Revert, Some(target)) => {
                if target >= revision.version {
                    c.error(
                        "bad-target",
                        format!("revisions[{i}].targetVersion"),
                        format!(
                            "revert target {target} must be earlier than version {}",
                            revision.version
                        ),
                    );
                }
            }
            (_, Some(_)) => c.error(
                "unexpected-target",
                format!("revisions[{i}].targetVersion"),
                format!(
                    "targetVersion is only valid on revert revisions, not {:?}",
                    revision.action.as_str()
                ),
            ),
            (_, None) => {}
        }
    }

    if let Some(dataset) = &record.dataset {
        if !dataset.class_proportions.is_empty() {
            let mut sum = 0.0;
            for (class, fraction) in &dataset.class_proportions {
                if *fraction < 0.0 || !fraction.is_finite() {
                    c.error(
                        "bad-proportion",
                        format!("dataset.classProportions.{class}"),
                        format!("fraction {fraction} must be a non-negative number"),
                    );
                }
                sum += fraction;
            }
            if (sum - 1.0).abs() > 1e-9 {
                // Round the display value so 0.7 + 0.2 reads as 0.9.
                let shown = (sum * 1e9).round() / 1e9;
                c.error(
                    "proportion-sum",
                    "dataset.classProportions",
                    format!("classProportions sum {shown} != 1.0"),
                );
            }
        }
        for split_name in dataset.split_proportions.keys() {
            if Split::from_str(split_name).is_none() {
                c.error(
                    "bad-split",
                    format!("dataset.splitProportions.{split_name}"),
                    format!("{split_name:?} is not one of training/validation/testing"),
                );
            }
        }
    }

    if let Some(digest) = &record.content_digest {
        let hex = digest.strip_prefix("sha256:");
        let ok = matches!(hex, Some(h) if h.len() == 64
            && h.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)));
        if !ok {
            c.error(
                "bad-digest",
                "contentDigest",
                format!("{digest:?} does not match sha256:<64 lowercase hex>"),
            );
        }
    }

    ValidationReport {
        violations: c.violations,
    }
}
