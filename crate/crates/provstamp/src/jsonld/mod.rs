//! Restricted JSON-LD profile: contexts, expansion, compaction and the
//! provenance record codec.
//!
//! The profile covers what embedded provenance documents actually use:
//! `@context` (IRI string, inline term map, or a list of both), `@type`,
//! `@id`, plain terms and `prefix:suffix` compact IRIs. Contexts resolve
//! only through the offline [`ContextRegistry`]; nothing is fetched.
//! `@graph`, `@reverse`, containers and language maps are out of scope.

mod codec;
mod compact;
mod context;
mod expand;

pub use codec::{
    document_to_record, event_from_json, parse_numeric, parse_record, record_to_document,
    serialize_record, CodecError, Style,
};
pub use compact::compact;
pub use context::{
    is_absolute_iri, ContextDeclaration, ContextEntry, ContextRegistry, TermMap, FLUX_IRI,
    SCHEMA_ORG_IRI,
};
pub use expand::{expand, is_expanded};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum JsonLdError {
    #[error("context {0:?} is already registered with a different term map")]
    ConflictingContext(String),
    #[error("{0:?} is not an absolute IRI")]
    RelativeIri(String),
    #[error("context {0:?} is not registered")]
    UnknownContext(String),
    #[error("term {0:?} does not resolve under the active context")]
    UnresolvableTerm(String),
    #[error("invalid context declaration: {0}")]
    InvalidContext(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::json::{self, Json};
    use crate::Mode;

    fn doc(text: &str) -> Json {
        json::parse(text.as_bytes(), Mode::Strict).unwrap().0
    }

    #[test]
    fn plain_terms_expand_through_the_bundled_table() {
        let registry = ContextRegistry::bundled();
        let input = doc(r#"{"@context":"https://schema.org","dateCreated":"2025-03-02T09:31:00Z"}"#);
        let (expanded, warnings) = expand(&input, &registry, Mode::Strict).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(
            expanded,
            doc(r#"{"https://schema.org/dateCreated":"2025-03-02T09:31:00Z"}"#)
        );
    }

    #[test]
    fn compact_iris_expand_by_prefix_concatenation() {
        let registry = ContextRegistry::bundled();
        let input = doc(
            r#"{"@context":["https://schema.org",{"flux":"https://example.org/flux#"}],
                "flux:version":"flux1.schnell"}"#,
        );
        let (expanded, _) = expand(&input, &registry, Mode::Strict).unwrap();
        assert_eq!(
            expanded,
            doc(r#"{"https://example.org/flux#version":"flux1.schnell"}"#)
        );
    }

    #[test]
    fn unregistered_contexts_are_errors() {
        let registry = ContextRegistry::bundled();
        let input = doc(r#"{"@context":"https://unknown.example/ctx","name":"x"}"#);
        assert_eq!(
            expand(&input, &registry, Mode::Strict).unwrap_err(),
            JsonLdError::UnknownContext("https://unknown.example/ctx".into())
        );
    }

    #[test]
    fn strict_expansion_rejects_unresolvable_terms() {
        let registry = ContextRegistry::bundled();
        let input = doc(r#"{"@context":"https://schema.org","fooBar":1}"#);
        assert_eq!(
            expand(&input, &registry, Mode::Strict).unwrap_err(),
            JsonLdError::UnresolvableTerm("fooBar".into())
        );
        let (_, warnings) = expand(&input, &registry, Mode::Lenient).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, "unresolvable-term");
    }

    #[test]
    fn expansion_is_idempotent() {
        let registry = ContextRegistry::bundled();
        let input = doc(
            r#"{"@context":["https://schema.org",{"flux":"https://example.org/flux#"}],
                "@type":"ImageObject","name":"x","flux:version":"v",
                "annotations":[{"class":"Dog","bbox":[1,2,3,4]}]}"#,
        );
        let (once, _) = expand(&input, &registry, Mode::Strict).unwrap();
        let (twice, _) = expand(&once, &registry, Mode::Strict).unwrap();
        assert_eq!(once, twice);
        assert!(is_expanded(&once));
    }

    #[test]
    fn compact_reverses_expand() {
        let registry = ContextRegistry::bundled();
        let declaration = ContextDeclaration::default_for(true);
        let input = doc(
            r#"{"@context":["https://schema.org",{"flux":"https://example.org/flux#"}],
                "@type":"ImageObject","name":"image_of_person",
                "creator":{"@type":"Person","name":"Author 1"},
                "flux:version":"flux1.schnell",
                "flux:parameters":{"steps":4,"seed":"140716430322376"}}"#,
        );
        let (expanded, _) = expand(&input, &registry, Mode::Strict).unwrap();
        let compacted = compact(&expanded, &declaration, &registry).unwrap();
        assert!(crate::json::canonically_equal(&compacted, &input));
    }

    #[test]
    fn unmatched_iris_stay_absolute_under_compaction() {
        let registry = ContextRegistry::bundled();
        let declaration = ContextDeclaration::default_for(false);
        let input = doc(r#"{"https://other.example/x":1}"#);
        let compacted = compact(&input, &declaration, &registry).unwrap();
        assert_eq!(
            compacted.get("https://other.example/x"),
            Some(&Json::int(1))
        );
    }

    #[test]
    fn longest_prefix_wins_compaction() {
        // Exhaustively check the tie-break rule on a small registry: all
        // candidate (term, suffix) pairs are enumerated by hand and the
        // winner picked per (longest prefix, lexicographic prefix, term).
        let mut registry = ContextRegistry::empty();
        let mut terms = TermMap::new();
        terms.insert("e".into(), "https://e.org/".into());
        terms.insert("ea".into(), "https://e.org/a#".into());
        registry.register("https://tiny.example/ctx", terms.clone()).unwrap();
        let declaration = ContextDeclaration {
            entries: vec![ContextEntry::Iri("https://tiny.example/ctx".into())],
        };

        let target = "https://e.org/a#b";
        let mut candidates: Vec<(usize, &str, &str, String)> = Vec::new();
        for (term, prefix) in &terms {
            if let Some(suffix) = target.strip_prefix(prefix.as_str()) {
                if !suffix.is_empty() {
                    candidates.push((prefix.len(), prefix, term, format!("{term}:{suffix}")));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)).then(a.2.cmp(b.2)));
        let expected = candidates[0].3.clone();
        assert_eq!(expected, "ea:b");

        let input = doc(&format!("{{\"{target}\":true}}"));
        let compacted = compact(&input, &declaration, &registry).unwrap();
        assert_eq!(compacted.get(&expected), Some(&Json::Bool(true)));
    }

    #[test]
    fn keys_with_unknown_prefixes_pass_through_expansion() {
        let registry = ContextRegistry::bundled();
        let input = doc(r#"{"@context":"https://schema.org","urn:x:y":1}"#);
        let (expanded, warnings) = expand(&input, &registry, Mode::Strict).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(expanded.get("urn:x:y"), Some(&Json::int(1)));
    }
}
