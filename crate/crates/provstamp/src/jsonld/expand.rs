//! Key expansion: short terms and compact IRIs become absolute IRIs.

use crate::json::Json;
use crate::{Mode, Warning};

use super::context::{is_absolute_iri, ContextDeclaration, ContextRegistry, TermMap};
use super::JsonLdError;

/// Rewrites every object key of `doc` to its absolute IRI using the
/// document's `@context` resolved against `registry`. `@context` is
/// removed from the output; `@type` and `@id` pass through; values are
/// left unchanged. Keys that resolve nowhere are errors in strict mode
/// and warnings in lenient mode; colon-containing keys whose prefix is
/// not a term are treated as already-absolute IRIs.
pub fn expand(
    doc: &Json,
    registry: &ContextRegistry,
    mode: Mode,
) -> Result<(Json, Vec<Warning>), JsonLdError> {
    let mut warnings = Vec::new();
    let active = match doc.get("@context") {
        Some(value) => registry.resolve(&ContextDeclaration::from_json(value)?)?,
        None => TermMap::new(),
    };
    let expanded = walk(doc, &active, registry, mode, true, &mut warnings)?;
    Ok((expanded, warnings))
}

/// Expands one key against the active term map. Returns the key
/// unchanged when it is a JSON-LD keyword or already an absolute IRI.
pub fn expand_key(
    key: &str,
    active: &TermMap,
    mode: Mode,
    warnings: &mut Vec<Warning>,
) -> Result<String, JsonLdError> {
    if key.starts_with('@') {
        return Ok(key.to_string());
    }
    if let Some(iri) = active.get(key) {
        return Ok(iri.clone());
    }
    if let Some((prefix, suffix)) = key.split_once(':') {
        if let Some(base) = active.get(prefix) {
            return Ok(format!("{base}{suffix}"));
        }
        // No matching prefix term: per the compact-IRI rules the key is
        // taken to already be an IRI (e.g. an earlier expansion output).
        let _ = suffix;
        return Ok(key.to_string());
    }
    match mode {
        Mode::Strict => Err(JsonLdError::UnresolvableTerm(key.to_string())),
        Mode::Lenient => {
            warnings.push(Warning::new(
                "unresolvable-term",
                format!("key {key:?} resolves to no IRI under the active context"),
            ));
            Ok(key.to_string())
        }
    }
}

fn walk(
    value: &Json,
    active: &TermMap,
    registry: &ContextRegistry,
    mode: Mode,
    top: bool,
    warnings: &mut Vec<Warning>,
) -> Result<Json, JsonLdError> {
    match value {
        Json::Object(members) => {
            // A nested @context extends the active map for its subtree.
            let mut scoped;
            let mut active = active;
            if !top {
                if let Some(ctx) = value.get("@context") {
                    scoped = active.clone();
                    let extra = registry.resolve(&ContextDeclaration::from_json(ctx)?)?;
                    scoped.extend(extra);
                    active = &scoped;
                }
            }
            let mut out = Vec::with_capacity(members.len());
            for (key, member) in members {
                if key == "@context" {
                    continue;
                }
                let expanded_key = expand_key(key, active, mode, warnings)?;
                out.push((
                    expanded_key,
                    walk(member, active, registry, mode, false, warnings)?,
                ));
            }
            Ok(Json::Object(out))
        }
        Json::Array(items) => Ok(Json::Array(
            items
                .iter()
                .map(|item| walk(item, active, registry, mode, false, warnings))
                .collect::<Result<_, _>>()?,
        )),
        other => Ok(other.clone()),
    }
}

/// True when every non-keyword key in the document is an absolute IRI.
pub fn is_expanded(doc: &Json) -> bool {
    match doc {
        Json::Object(members) => members.iter().all(|(key, value)| {
            (key.starts_with('@') || is_absolute_iri(key)) && is_expanded(value)
        }),
        Json::Array(items) => items.iter().all(is_expanded),
        _ => true,
    }
}
