//! Aggregate counts over a set of provenance documents, for spotting
//! dataset gaps (classes, splits, fidelity, requirement coverage).

use std::collections::BTreeMap;

use crate::json::Json;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSummary {
    pub total_images: u64,
    /// Annotation class → count; one count per annotation entry.
    pub by_class: BTreeMap<String, u64>,
    pub by_split: BTreeMap<String, u64>,
    pub by_fidelity: BTreeMap<String, u64>,
    /// Requirement description → number of images citing it verbatim.
    pub requirement_coverage: BTreeMap<String, u64>,
    /// Image files seen without any provenance payload.
    pub missing_provenance: u64,
}

impl DatasetSummary {
    pub fn to_json(&self) -> Json {
        fn counts(map: &BTreeMap<String, u64>) -> Json {
            Json::Object(
                map.iter()
                    .map(|(key, count)| (key.clone(), Json::int(*count as i64)))
                    .collect(),
            )
        }
        Json::Object(vec![
            ("totalImages".into(), Json::int(self.total_images as i64)),
            ("byClass".into(), counts(&self.by_class)),
            ("bySplit".into(), counts(&self.by_split)),
            ("byFidelity".into(), counts(&self.by_fidelity)),
            (
                "requirementCoverage".into(),
                counts(&self.requirement_coverage),
            ),
            (
                "missingProvenance".into(),
                Json::int(self.missing_provenance as i64),
            ),
        ])
    }
}

/// Tallies the documents. `missing_provenance` starts at zero; scanners
/// that know how many files lacked provenance set it afterwards.
pub fn summarize<'a, I>(docs: I) -> DatasetSummary
where
    I: IntoIterator<Item = &'a Json>,
{
    let mut summary = DatasetSummary::default();
    for doc in docs {
        summary.total_images += 1;
        if let Some(annotations) = doc.get("annotations").and_then(Json::as_array) {
            for annotation in annotations {
                if let Some(class) = annotation.get("class").and_then(Json::as_str) {
                    *summary.by_class.entry(class.to_string()).or_insert(0) += 1;
                }
            }
        }
        if let Some(split) = doc.get("split").and_then(Json::as_str) {
            *summary.by_split.entry(split.to_string()).or_insert(0) += 1;
        }
        if let Some(fidelity) = doc.get("fidelity").and_then(Json::as_str) {
            *summary.by_fidelity.entry(fidelity.to_string()).or_insert(0) += 1;
        }
        if let Some(requirements) = doc.get("requirements").and_then(Json::as_array) {
            for requirement in requirements {
                if let Some(description) = requirement.get("description").and_then(Json::as_str) {
                    *summary
                        .requirement_coverage
                        .entry(description.to_string())
                        .or_insert(0) += 1;
                }
            }
        }
    }
    summary
}
