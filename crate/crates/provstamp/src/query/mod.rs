//! Filter-expression language, directory scanning, persistent indexing
//! and dataset summaries over embedded provenance.

mod ast;
mod eval;
mod parser;
mod scan;
mod summary;

pub use ast::{CompareOp, Literal, Path, PathSegment, QueryExpr};
pub use eval::eval_query;
pub use parser::parse_query;
pub use scan::{build_index, collect_documents, query_index, scan, IndexEntry, IndexFile, ScanOutcome};
pub use summary::{summarize, DatasetSummary};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("syntax error at byte {offset}: found {found}, expected {}", .expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("invalid index file: {0}")]
    InvalidIndex(String),
}
