//! Dataset directory scanning and the persistent newline-delimited index.

use std::io;
use std::path::{Path as FsPath, PathBuf};

use walkdir::WalkDir;

use crate::container;
use crate::integrity;
use crate::json::{self, Json};
use crate::jsonld::ContextRegistry;
use crate::Mode;

use super::ast::QueryExpr;
use super::eval::eval_query;
use super::QueryError;

/// The result of a directory scan. Per-file problems never abort the
/// walk; they are collected in `issues`.
#[derive(Debug, Default)]
pub struct ScanOutcome {
    /// Matching files with their provenance documents, in lexicographic
    /// path order.
    pub matches: Vec<(PathBuf, Json)>,
    /// Image files carrying no provenance payload.
    pub skipped_no_provenance: usize,
    pub issues: Vec<(PathBuf, String)>,
}

fn is_image_path(path: &FsPath) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| {
            let lower = e.to_ascii_lowercase();
            matches!(lower.as_str(), "png" | "jpg" | "jpeg")
        })
}

/// All image files under `root`, sorted by path so results do not depend
/// on traversal order.
fn collect_images(root: &FsPath, issues: &mut Vec<(PathBuf, String)>) -> io::Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{} is not a readable directory", root.display()),
        ));
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(root) {
        match entry {
            Ok(entry) => {
                if entry.file_type().is_file() && is_image_path(entry.path()) {
                    files.push(entry.into_path());
                }
            }
            Err(err) => {
                let path = err.path().map(FsPath::to_path_buf).unwrap_or_default();
                issues.push((path, err.to_string()));
            }
        }
    }
    files.sort_by(|a, b| a.as_os_str().cmp(b.as_os_str()));
    Ok(files)
}

/// Reads one image's provenance document, if any.
fn load_document(path: &FsPath) -> Result<Option<Json>, String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    let payload = match container::extract(&bytes) {
        Ok(payload) => payload,
        Err(e) => return Err(e.to_string()),
    };
    match payload {
        None => Ok(None),
        Some(payload) => match json::parse(&payload, Mode::Lenient) {
            Ok((doc, _)) => Ok(Some(doc)),
            Err(e) => Err(e.to_string()),
        },
    }
}

/// Recursively scans `root` for PNG/JPEG files whose embedded provenance
/// matches `query`.
pub fn scan(root: &FsPath, query: &QueryExpr) -> io::Result<ScanOutcome> {
    scan_filtered(root, Some(query))
}

/// Collects every provenance document under `root`, unfiltered.
pub fn collect_documents(root: &FsPath) -> io::Result<ScanOutcome> {
    scan_filtered(root, None)
}

fn scan_filtered(root: &FsPath, query: Option<&QueryExpr>) -> io::Result<ScanOutcome> {
    let mut outcome = ScanOutcome::default();
    for path in collect_images(root, &mut outcome.issues)? {
        match load_document(&path) {
            Ok(Some(doc)) => {
                if query.is_none_or(|q| eval_query(q, &doc)) {
                    outcome.matches.push((path, doc));
                }
            }
            Ok(None) => outcome.skipped_no_provenance += 1,
            Err(message) => outcome.issues.push((path, message)),
        }
    }
    Ok(outcome)
}

/// One line of the index: a file (relative to the indexed root), its
/// provenance document, and the digest verification status at index time.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub path: String,
    pub record: Json,
    pub digest_status: String,
}

/// The persistent index: newline-delimited JSON, one object per indexed
/// image, sorted by path. Rebuilding over an unchanged tree reproduces
/// the file byte for byte.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndexFile {
    pub entries: Vec<IndexEntry>,
}

impl IndexFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for entry in &self.entries {
            let line = Json::Object(vec![
                ("path".into(), Json::str(entry.path.clone())),
                ("record".into(), entry.record.clone()),
                ("digestStatus".into(), Json::str(entry.digest_status.clone())),
            ]);
            out.extend_from_slice(&json::canonicalize(&line).expect("index entries are finite"));
            out.push(b'\n');
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<IndexFile, QueryError> {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| QueryError::InvalidIndex("index is not UTF-8".into()))?;
        let mut entries = Vec::new();
        for (number, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (doc, _) = json::parse(line.as_bytes(), Mode::Strict)
                .map_err(|e| QueryError::InvalidIndex(format!("line {}: {e}", number + 1)))?;
            let path = doc
                .get("path")
                .and_then(Json::as_str)
                .ok_or_else(|| {
                    QueryError::InvalidIndex(format!("line {}: missing path", number + 1))
                })?
                .to_string();
            let record = doc
                .get("record")
                .cloned()
                .ok_or_else(|| {
                    QueryError::InvalidIndex(format!("line {}: missing record", number + 1))
                })?;
            let digest_status = doc
                .get("digestStatus")
                .and_then(Json::as_str)
                .unwrap_or("UNKNOWN")
                .to_string();
            entries.push(IndexEntry {
                path,
                record,
                digest_status,
            });
        }
        Ok(IndexFile { entries })
    }
}

/// Indexes every provenance-bearing image under `root`. Files without
/// provenance are skipped; per-file problems are collected.
pub fn build_index(
    root: &FsPath,
    registry: &ContextRegistry,
) -> io::Result<(IndexFile, Vec<(PathBuf, String)>)> {
    let mut issues = Vec::new();
    let mut entries = Vec::new();
    for path in collect_images(root, &mut issues)? {
        let relative = path
            .strip_prefix(root)
            .unwrap_or(&path)
            .to_string_lossy()
            .into_owned();
        match load_document(&path) {
            Ok(Some(record)) => {
                let digest_status = match std::fs::read(&path)
                    .map_err(|e| e.to_string())
                    .and_then(|bytes| {
                        integrity::verify(&bytes, registry).map_err(|e| e.to_string())
                    }) {
                    Ok(report) => report.status.as_str().to_string(),
                    Err(message) => {
                        issues.push((path.clone(), message));
                        continue;
                    }
                };
                entries.push(IndexEntry {
                    path: relative,
                    record,
                    digest_status,
                });
            }
            Ok(None) => {}
            Err(message) => issues.push((path, message)),
        }
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    Ok((IndexFile { entries }, issues))
}

/// Runs a query against an index instead of the filesystem.
pub fn query_index<'a>(index: &'a IndexFile, query: &QueryExpr) -> Vec<&'a IndexEntry> {
    index
        .entries
        .iter()
        .filter(|entry| eval_query(query, &entry.record))
        .collect()
}
