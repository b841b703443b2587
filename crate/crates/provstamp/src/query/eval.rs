//! Query evaluation over compacted provenance documents.
//!
//! Evaluation is total: missing paths make `Compare` and `Exists` false,
//! `[*]` existentially quantifies over array elements, numeric-looking
//! strings coerce for numeric comparisons, ISO 8601 strings compare
//! chronologically under the ordering operators, and every other type
//! mismatch is simply false.

use crate::json::Json;
use crate::jsonld::parse_numeric;
use crate::model::Timestamp;

use super::ast::{CompareOp, Literal, Path, PathSegment, QueryExpr};

/// Evaluates a parsed filter against a document.
pub fn eval_query(ast: &QueryExpr, doc: &Json) -> bool {
    match ast {
        QueryExpr::Or(items) => items.iter().any(|item| eval_query(item, doc)),
        QueryExpr::And(items) => items.iter().all(|item| eval_query(item, doc)),
        QueryExpr::Not(inner) => !eval_query(inner, doc),
        QueryExpr::Exists(path) => !resolve(doc, path).is_empty(),
        QueryExpr::Compare { path, op, literal } => resolve(doc, path)
            .iter()
            .any(|value| compare_value(value, *op, literal)),
    }
}

/// All document values reachable through the path; wildcards fan out
/// over array elements.
fn resolve<'a>(doc: &'a Json, path: &Path) -> Vec<&'a Json> {
    let mut current = vec![doc];
    for segment in &path.segments {
        let mut next = Vec::new();
        for value in current {
            match segment {
                PathSegment::Key(key) => {
                    if let Some(member) = value.get(key) {
                        next.push(member);
                    }
                }
                PathSegment::Wildcard => {
                    if let Some(items) = value.as_array() {
                        next.extend(items.iter());
                    }
                }
            }
        }
        if next.is_empty() {
            return next;
        }
        current = next;
    }
    current
}

/// A number, or a string that looks like one.
fn coerce_num(value: &Json) -> Option<f64> {
    match value {
        Json::Number(n) => Some(n.as_f64()),
        Json::String(s) => parse_numeric(s),
        _ => None,
    }
}

fn value_eq(value: &Json, literal: &Literal) -> bool {
    match literal {
        Literal::Num(n) => coerce_num(value) == Some(*n),
        Literal::Str(t) => match value {
            Json::String(s) => s == t,
            // A quoted number compares numerically against number values.
            Json::Number(v) => parse_numeric(t).is_some_and(|n| v.as_f64() == n),
            _ => false,
        },
        Literal::Bool(b) => value.as_bool() == Some(*b),
    }
}

/// Whether `!=` applies at all: a type mismatch is false, not "unequal".
fn comparable(value: &Json, literal: &Literal) -> bool {
    match literal {
        Literal::Num(_) => coerce_num(value).is_some(),
        Literal::Str(t) => match value {
            Json::String(_) => true,
            Json::Number(_) => parse_numeric(t).is_some(),
            _ => false,
        },
        Literal::Bool(_) => matches!(value, Json::Bool(_)),
    }
}

fn compare_value(value: &Json, op: CompareOp, literal: &Literal) -> bool {
    match op {
        CompareOp::Eq => value_eq(value, literal),
        CompareOp::Ne => comparable(value, literal) && !value_eq(value, literal),
        CompareOp::Lt | CompareOp::Le | CompareOp::Gt | CompareOp::Ge => {
            let ordering = match literal {
                Literal::Num(n) => coerce_num(value).and_then(|v| v.partial_cmp(n)),
                Literal::Str(t) => match (value, Timestamp::parse(t)) {
                    (Json::String(s), Ok(bound)) => Timestamp::parse(s)
                        .ok()
                        .map(|v| v.cmp(&bound)),
                    _ => None,
                },
                Literal::Bool(_) => None,
            };
            match ordering {
                None => false,
                Some(ordering) => match op {
                    CompareOp::Lt => ordering.is_lt(),
                    CompareOp::Le => ordering.is_le(),
                    CompareOp::Gt => ordering.is_gt(),
                    CompareOp::Ge => ordering.is_ge(),
                    _ => unreachable!(),
                },
            }
        }
        CompareOp::Contains => match value {
            Json::String(s) => matches!(literal, Literal::Str(t) if s.contains(t.as_str())),
            Json::Array(items) => items.iter().any(|item| value_eq(item, literal)),
            _ => false,
        },
    }
}
