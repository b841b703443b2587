//! Context declarations and the offline context registry.
//!
//! Context IRIs are never fetched over the network: a document can only be
//! expanded against contexts that were registered up front. The crate
//! bundles the two contexts its own documents use (a schema.org subset and
//! the flux generator vocabulary) from `contexts/`; callers may register
//! more, either programmatically or by loading context files of the same
//! shape (`{"@id": <iri>, "@context": {term: iri}}`).

use std::collections::BTreeMap;

use crate::json::{self, Json};
use crate::Mode;

use super::JsonLdError;

pub const SCHEMA_ORG_IRI: &str = "https://schema.org";
pub const FLUX_IRI: &str = "https://example.org/flux#";

const SCHEMA_ORG_FILE: &str = include_str!("../../contexts/schema.org.json");
const FLUX_FILE: &str = include_str!("../../contexts/flux.json");

/// Term → IRI (or term → IRI prefix) definitions from one context.
pub type TermMap = BTreeMap<String, String>;

/// One entry of a document's `@context`: either a context IRI resolved
/// through the registry, or an inline term map.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextEntry {
    Iri(String),
    Inline(TermMap),
}

/// An ordered `@context` declaration. Later entries shadow earlier ones
/// when both define the same term.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextDeclaration {
    pub entries: Vec<ContextEntry>,
}

impl ContextDeclaration {
    /// The declaration emitted on freshly created records:
    /// `"https://schema.org"` first, then the inline flux prefix when the
    /// record carries generation data.
    pub fn default_for(with_generation: bool) -> ContextDeclaration {
        let mut entries = vec![ContextEntry::Iri(SCHEMA_ORG_IRI.into())];
        if with_generation {
            let mut terms = TermMap::new();
            terms.insert("flux".into(), FLUX_IRI.into());
            entries.push(ContextEntry::Inline(terms));
        }
        ContextDeclaration { entries }
    }

    /// Renders as the `@context` value: a bare string for a single IRI
    /// entry, otherwise an array.
    pub fn to_json(&self) -> Json {
        let items: Vec<Json> = self
            .entries
            .iter()
            .map(|entry| match entry {
                ContextEntry::Iri(iri) => Json::str(iri.clone()),
                ContextEntry::Inline(terms) => Json::Object(
                    terms
                        .iter()
                        .map(|(term, iri)| (term.clone(), Json::str(iri.clone())))
                        .collect(),
                ),
            })
            .collect();
        match items.len() {
            1 if matches!(self.entries[0], ContextEntry::Iri(_)) => items.into_iter().next().unwrap(),
            _ => Json::Array(items),
        }
    }

    /// Reads an `@context` value (string, inline map, or array of both).
    pub fn from_json(value: &Json) -> Result<ContextDeclaration, JsonLdError> {
        fn entry(value: &Json) -> Result<ContextEntry, JsonLdError> {
            match value {
                Json::String(iri) => Ok(ContextEntry::Iri(iri.clone())),
                Json::Object(members) => {
                    let mut terms = TermMap::new();
                    for (term, iri) in members {
                        match iri {
                            Json::String(iri) => {
                                terms.insert(term.clone(), iri.clone());
                            }
                            _ => {
                                return Err(JsonLdError::InvalidContext(format!(
                                    "term {term:?} must map to an IRI string"
                                )))
                            }
                        }
                    }
                    Ok(ContextEntry::Inline(terms))
                }
                _ => Err(JsonLdError::InvalidContext(
                    "@context entries must be IRI strings or term maps".into(),
                )),
            }
        }

        let entries = match value {
            Json::Array(items) => items.iter().map(entry).collect::<Result<_, _>>()?,
            other => vec![entry(other)?],
        };
        Ok(ContextDeclaration { entries })
    }
}

/// Offline map from context IRI to its term definitions.
#[derive(Debug, Clone, Default)]
pub struct ContextRegistry {
    registry: BTreeMap<String, TermMap>,
}

impl ContextRegistry {
    /// An empty registry with no contexts at all.
    pub fn empty() -> ContextRegistry {
        ContextRegistry::default()
    }

    /// A registry pre-loaded with the bundled default contexts.
    pub fn bundled() -> ContextRegistry {
        let mut registry = ContextRegistry::default();
        for file in [SCHEMA_ORG_FILE, FLUX_FILE] {
            registry
                .register_file(file.as_bytes())
                .expect("bundled context files are well-formed");
        }
        registry
    }

    /// Registers `terms` under `iri`. Registering the same IRI twice is
    /// fine if the maps agree, an error otherwise.
    pub fn register(&mut self, iri: &str, terms: TermMap) -> Result<(), JsonLdError> {
        if !is_absolute_iri(iri) {
            return Err(JsonLdError::RelativeIri(iri.into()));
        }
        for (term, value) in &terms {
            if term.is_empty() {
                return Err(JsonLdError::InvalidContext(format!(
                    "context {iri:?} defines an empty term"
                )));
            }
            if !is_absolute_iri(value) {
                return Err(JsonLdError::RelativeIri(value.clone()));
            }
        }
        if let Some(existing) = self.registry.get(iri) {
            if *existing != terms {
                return Err(JsonLdError::ConflictingContext(iri.into()));
            }
            return Ok(());
        }
        self.registry.insert(iri.into(), terms);
        Ok(())
    }

    /// Loads a context file of the form `{"@id": iri, "@context": {...}}`.
    pub fn register_file(&mut self, bytes: &[u8]) -> Result<String, JsonLdError> {
        let (doc, _) = json::parse(bytes, Mode::Strict)
            .map_err(|e| JsonLdError::InvalidContext(e.to_string()))?;
        let iri = doc
            .get("@id")
            .and_then(Json::as_str)
            .ok_or_else(|| JsonLdError::InvalidContext("context file lacks an @id IRI".into()))?
            .to_string();
        let terms = match doc.get("@context") {
            Some(value @ Json::Object(_)) => {
                let mut decl = ContextDeclaration::from_json(value)?;
                match decl.entries.pop() {
                    Some(ContextEntry::Inline(terms)) => terms,
                    _ => unreachable!("object parses to an inline entry"),
                }
            }
            _ => {
                return Err(JsonLdError::InvalidContext(
                    "context file lacks an @context term map".into(),
                ))
            }
        };
        self.register(&iri, terms)?;
        Ok(iri)
    }

    pub fn lookup(&self, iri: &str) -> Option<&TermMap> {
        self.registry.get(iri)
    }

    pub fn iris(&self) -> impl Iterator<Item = &str> {
        self.registry.keys().map(String::as_str)
    }

    /// Flattens a declaration into one active term map, resolving IRI
    /// entries through the registry. Later entries shadow earlier ones.
    pub fn resolve(&self, declaration: &ContextDeclaration) -> Result<TermMap, JsonLdError> {
        let mut active = TermMap::new();
        for entry in &declaration.entries {
            match entry {
                ContextEntry::Iri(iri) => {
                    let terms = self
                        .lookup(iri)
                        .ok_or_else(|| JsonLdError::UnknownContext(iri.clone()))?;
                    for (term, value) in terms {
                        active.insert(term.clone(), value.clone());
                    }
                }
                ContextEntry::Inline(terms) => {
                    for (term, value) in terms {
                        active.insert(term.clone(), value.clone());
                    }
                }
            }
        }
        Ok(active)
    }
}

/// True when `s` starts with a URI scheme (`ALPHA *(ALPHA/DIGIT/+/-/.) ":"`)
/// followed by at least one character.
pub fn is_absolute_iri(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let (scheme, rest) = s.split_at(colon);
    let mut chars = scheme.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    first.is_ascii_alphabetic()
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && rest.len() > 1
}
