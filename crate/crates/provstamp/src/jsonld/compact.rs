//! Key compaction: absolute IRIs back to terms and compact IRIs.

use crate::json::Json;

use super::context::{ContextDeclaration, ContextRegistry, TermMap};
use super::JsonLdError;

/// Rewrites the expanded document's IRI keys back to short form under
/// `context` and reinstates the `@context` declaration, making this the
/// inverse of [`super::expand`] for documents expandable under the same
/// context.
///
/// For each IRI key: an exact term match wins (smallest term on ties),
/// otherwise the longest registered prefix produces a `term:suffix`
/// compact IRI (ties broken by lexicographic prefix IRI, then term), and
/// an IRI matching nothing stays absolute.
pub fn compact(
    doc: &Json,
    context: &ContextDeclaration,
    registry: &ContextRegistry,
) -> Result<Json, JsonLdError> {
    let active = registry.resolve(context)?;
    let body = walk(doc, &active);
    match body {
        Json::Object(mut members) => {
            members.insert(0, ("@context".into(), context.to_json()));
            Ok(Json::Object(members))
        }
        other => Ok(other),
    }
}

/// Compacts a single key against an active term map.
pub fn compact_key(key: &str, active: &TermMap) -> String {
    if key.starts_with('@') {
        return key.to_string();
    }
    // Exact term definitions beat compact IRIs; BTreeMap order makes the
    // smallest term win when several map to the same IRI.
    for (term, iri) in active {
        if iri == key {
            return term.clone();
        }
    }
    let mut best: Option<(&str, &str, &str)> = None; // (prefix iri, term, suffix)
    for (term, prefix) in active {
        if let Some(suffix) = key.strip_prefix(prefix.as_str()) {
            if suffix.is_empty() {
                continue;
            }
            let candidate = (prefix.as_str(), term.as_str(), suffix);
            best = Some(match best {
                None => candidate,
                Some(current) => {
                    let longer = candidate.0.len() > current.0.len();
                    let tie = candidate.0.len() == current.0.len()
                        && (candidate.0, candidate.1) < (current.0, current.1);
                    if longer || tie {
                        candidate
                    } else {
                        current
                    }
                }
            });
        }
    }
    match best {
        Some((_, term, suffix)) => format!("{term}:{suffix}"),
        None => key.to_string(),
    }
}

fn walk(value: &Json, active: &TermMap) -> Json {
    match value {
        Json::Object(members) => Json::Object(
            members
                .iter()
                .map(|(key, member)| (compact_key(key, active), walk(member, active)))
                .collect(),
        ),
        Json::Array(items) => Json::Array(items.iter().map(|item| walk(item, active)).collect()),
        other => other.clone(),
    }
}
