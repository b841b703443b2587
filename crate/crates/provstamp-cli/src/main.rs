//! `provstamp` — embed, inspect, version and query JSON-LD provenance
//! stored inside PNG and JPEG files.
//!
//! Exit codes: 0 success/match/valid; 1 semantic negative (no matches,
//! validation errors, failed digest); 2 usage error; 3 I/O or
//! container/format error. Data goes to stdout, diagnostics to stderr.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use provstamp::container::{self, EmbedOptions};
use provstamp::integrity::{self, DigestStatus};
use provstamp::json::{self, Json};
use provstamp::jsonld::{
    self, event_from_json, parse_record, serialize_record, CodecError, ContextRegistry, Style,
};
use provstamp::model::{
    validate_record, Agent, AgentType, ProvenanceRecord, RevisionAction, RevisionRequest,
    Timestamp, ValidationReport,
};
use provstamp::query::{self, parse_query};
use provstamp::{Mode, Warning};

/// Environment variable naming a directory of extra context files
/// (`{"@id": <iri>, "@context": {term: iri}}`) loaded at startup.
const CONTEXT_DIR_VAR: &str = "PROVSTAMP_CONTEXT_DIR";

#[derive(Parser)]
#[command(
    name = "provstamp",
    version,
    about = "Embedded JSON-LD image provenance: embed, validate, version, verify and query"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a provenance record and embed it into an image, adding a
    /// content digest unless --no-digest is given
    Embed(EmbedArgs),
    /// Print the provenance payload embedded in an image
    Extract(ExtractArgs),
    /// Validate the provenance embedded in an image
    Validate(ValidateArgs),
    /// Append a transformation event to an image's provenance
    Append(AppendArgs),
    /// Append a revision entry to an image's provenance
    Revise(ReviseArgs),
    /// Check the embedded content digest against the image bytes
    Verify(VerifyArgs),
    /// Find images whose provenance matches a filter expression
    Query(QueryArgs),
    /// Build a newline-delimited JSON index of a dataset tree
    Index(IndexArgs),
    /// Print aggregate counts over a dataset tree
    Summary(SummaryArgs),
    /// Remove all embedded provenance from an image
    Strip(StripArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct OutputTarget {
    /// Rewrite the input image file itself
    #[arg(long)]
    in_place: bool,
    /// Write the result to this path instead
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Image file to embed into
    #[arg(long)]
    image: PathBuf,
    /// Provenance record JSON file, or `-` for standard input
    #[arg(long)]
    provenance: String,
    /// Compress the payload (PNG carrier only)
    #[arg(long)]
    compress: bool,
    /// Skip sealing: embed the record without a content digest
    #[arg(long)]
    no_digest: bool,
    #[command(flatten)]
    target: OutputTarget,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    image: PathBuf,
    /// Re-serialize with 2-space indentation
    #[arg(long, conflicts_with = "canonical")]
    pretty: bool,
    /// Re-serialize in canonical form (sorted keys, no whitespace)
    #[arg(long)]
    canonical: bool,
    /// Expand keys to absolute IRIs before printing
    #[arg(long)]
    expanded: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    image: PathBuf,
    /// Reject duplicate keys and unknown terms; promote ordering
    /// warnings to errors
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct AppendArgs {
    #[arg(long)]
    image: PathBuf,
    /// Transformation event JSON file, or `-` for standard input
    #[arg(long)]
    event: String,
    /// Reject events whose timestamp precedes the last one
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    compress: bool,
    /// Write to this path instead of rewriting the image in place
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReviseArgs {
    #[arg(long)]
    image: PathBuf,
    /// Revision action
    #[arg(long, value_enum)]
    action: ActionArg,
    /// Version to roll back to (revert only)
    #[arg(long)]
    to_version: Option<u32>,
    /// Acting agent's name
    #[arg(long)]
    agent: String,
    #[arg(long, value_enum, default_value = "person")]
    agent_type: AgentTypeArg,
    #[arg(long)]
    note: Option<String>,
    #[arg(long)]
    compress: bool,
    /// Write to this path instead of rewriting the image in place
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActionArg {
    AddData,
    RemoveData,
    Modify,
    Revert,
}

impl From<ActionArg> for RevisionAction {
    fn from(arg: ActionArg) -> RevisionAction {
        match arg {
            ActionArg::AddData => RevisionAction::AddData,
            ActionArg::RemoveData => RevisionAction::RemoveData,
            ActionArg::Modify => RevisionAction::Modify,
            ActionArg::Revert => RevisionAction::Revert,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentTypeArg {
    Person,
    Organization,
    Software,
}

impl From<AgentTypeArg> for AgentType {
    fn from(arg: AgentTypeArg) -> AgentType {
        match arg {
            AgentTypeArg::Person => AgentType::Person,
            AgentTypeArg::Organization => AgentType::Organization,
            AgentTypeArg::Software => AgentType::Software,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    image: PathBuf,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).multiple(false))]
struct QueryArgs {
    /// Dataset directory to scan
    #[arg(long, group = "source")]
    root: Option<PathBuf>,
    /// Query a prebuilt index file instead of scanning
    #[arg(long, group = "source")]
    index: Option<PathBuf>,
    /// Filter expression, e.g. 'annotations[*].class == "Dog"'
    #[arg(long = "where")]
    where_expr: String,
    #[arg(long, value_enum, default_value = "paths")]
    format: QueryFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryFormat {
    /// One matching file path per line
    Paths,
    /// One JSON object per line: {"path": ..., "record": ...}
    Jsonl,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    root: PathBuf,
    /// Where to write the index file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummaryArgs {
    #[arg(long)]
    root: PathBuf,
}

#[derive(Args)]
struct StripArgs {
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    target: OutputTarget,
}

/// A terminating failure with its exit code. Semantic negatives (exit 1)
/// are returned as plain codes by the command handlers instead.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(message) | Failure::Runtime(message) => message,
        }
    }
}

fn runtime(message: impl std::fmt::Display) -> Failure {
    Failure::Runtime(message.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version output are not errors.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let registry = load_registry()?;
    match cli.command {
        Command::Embed(args) => embed(args, &registry),
        Command::Extract(args) => extract(args, &registry),
        Command::Validate(args) => validate(args, &registry),
        Command::Append(args) => append(args, &registry),
        Command::Revise(args) => revise(args, &registry),
        Command::Verify(args) => verify(args, &registry),
        Command::Query(args) => query_cmd(args),
        Command::Index(args) => index(args, &registry),
        Command::Summary(args) => summary(args),
        Command::Strip(args) => strip(args),
    }
}

/// The bundled contexts plus any context files found in
/// `$PROVSTAMP_CONTEXT_DIR`.
fn load_registry() -> Result<ContextRegistry, Failure> {
    let mut registry = ContextRegistry::bundled();
    if let Ok(dir) = std::env::var(CONTEXT_DIR_VAR) {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| runtime(format!("{CONTEXT_DIR_VAR} {dir:?}: {e}")))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|path| path.extension().is_some_and(|ext| ext == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let bytes = std::fs::read(&path).map_err(|e| runtime(format!("{path:?}: {e}")))?;
            registry
                .register_file(&bytes)
                .map_err(|e| runtime(format!("{path:?}: {e}")))?;
        }
    }
    Ok(registry)
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn read_file_or_stdin(source: &str) -> Result<Vec<u8>, Failure> {
    if source == "-" {
        let mut bytes = Vec::new();
        std::io::stdin()
            .read_to_end(&mut bytes)
            .map_err(|e| runtime(format!("standard input: {e}")))?;
        Ok(bytes)
    } else {
        read_file(Path::new(source))
    }
}

/// All writes go through a temp file in the target directory followed by
/// an atomic rename, so a failure never leaves a half-written image.
/// Existing files keep their permissions; new files get umask-masked 666.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    use std::os::unix::fs::PermissionsExt;

    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let existing_permissions = std::fs::metadata(path).map(|m| m.permissions()).ok();
    let mut builder = tempfile::Builder::new();
    match &existing_permissions {
        Some(permissions) => builder.permissions(permissions.clone()),
        None => builder.permissions(std::fs::Permissions::from_mode(0o666)),
    };
    let mut file = builder
        .tempfile_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| runtime(format!("creating temp file: {e}")))?;
    file.write_all(bytes)
        .map_err(|e| runtime(format!("writing temp file: {e}")))?;
    file.persist(path)
        .map_err(|e| runtime(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

fn print_warnings(warnings: &[Warning]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

fn emit(bytes: &[u8], ensure_newline: bool) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    lock.write_all(bytes)
        .and_then(|_| {
            if ensure_newline && bytes.last() != Some(&b'\n') {
                lock.write_all(b"\n")
            } else {
                Ok(())
            }
        })
        .map_err(|e| runtime(format!("standard output: {e}")))
}

fn mode_flag(strict: bool) -> Mode {
    if strict {
        Mode::Strict
    } else {
        Mode::Lenient
    }
}

/// Maps codec failures: broken JSON/containers are format errors (3);
/// schema problems are validation negatives (1).
fn parse_payload(
    payload: &[u8],
    mode: Mode,
    registry: &ContextRegistry,
) -> Result<Result<(ProvenanceRecord, Vec<Warning>), String>, Failure> {
    match parse_record(payload, mode, registry) {
        Ok(parsed) => Ok(Ok(parsed)),
        Err(err @ CodecError::Json(_)) => Err(runtime(err)),
        Err(other) => Ok(Err(other.to_string())),
    }
}

fn report_errors_to_stderr(report: &ValidationReport) {
    for violation in report.errors() {
        eprintln!("invalid: [{}] {}: {}", violation.code, violation.path, violation.message);
    }
}

fn embed(args: EmbedArgs, registry: &ContextRegistry) -> Result<u8, Failure> {
    let image = read_file(&args.image)?;
    let payload = read_file_or_stdin(&args.provenance)?;
    let (record, warnings) = match parse_payload(&payload, Mode::Lenient, registry)? {
        Ok(parsed) => parsed,
        Err(message) => {
            eprintln!("invalid: {message}");
            return Ok(1);
        }
    };
    print_warnings(&warnings);

    let report = validate_record(&record, Mode::Lenient);
    if !report.is_valid() {
        report_errors_to_stderr(&report);
        return Ok(1);
    }

    let options = EmbedOptions {
        compress: args.compress,
    };
    let bytes = if args.no_digest {
        let payload = serialize_record(&record, Style::Canonical).map_err(runtime)?;
        container::embed(&image, &payload, options)
            .map_err(runtime)?
            .bytes
    } else {
        integrity::seal(&image, &record, options).map_err(runtime)?
    };

    let destination = if args.target.in_place {
        args.image.clone()
    } else {
        args.target.output.clone().expect("clap group guarantees one")
    };
    write_atomic(&destination, &bytes)?;
    eprintln!(
        "embedded {} bytes of provenance into {}",
        payload.len(),
        destination.display()
    );
    Ok(0)
}

fn extract_payload(image_path: &Path) -> Result<Option<Vec<u8>>, Failure> {
    let image = read_file(image_path)?;
    let (payload, warnings) = container::extract_with_warnings(&image).map_err(runtime)?;
    print_warnings(&warnings);
    Ok(payload)
}

fn extract(args: ExtractArgs, registry: &ContextRegistry) -> Result<u8, Failure> {
    let Some(payload) = extract_payload(&args.image)? else {
        eprintln!("no provenance found in {}", args.image.display());
        return Ok(1);
    };
    if !args.pretty && !args.canonical && !args.expanded {
        return emit(&payload, true).map(|_| 0);
    }
    let (doc, warnings) = json::parse(&payload, Mode::Lenient).map_err(runtime)?;
    print_warnings(&warnings);
    let doc = if args.expanded {
        let (expanded, warnings) =
            jsonld::expand(&doc, registry, Mode::Lenient).map_err(runtime)?;
        print_warnings(&warnings);
        expanded
    } else {
        doc
    };
    let rendered = if args.canonical {
        json::canonicalize(&doc).map_err(runtime)?
    } else {
        json::pretty(&doc)
    };
    emit(&rendered, true).map(|_| 0)
}

fn validate(args: ValidateArgs, registry: &ContextRegistry) -> Result<u8, Failure> {
    let Some(payload) = extract_payload(&args.image)? else {
        eprintln!("no provenance found in {}", args.image.display());
        return Ok(1);
    };
    let mode = mode_flag(args.strict);
    let (record, warnings) = match parse_record(&payload, mode, registry) {
        Ok(parsed) => parsed,
        Err(err) => {
            // Unparseable provenance is a validation failure; report it
            // in the same JSON shape.
            let report = Json::Object(vec![(
                "violations".into(),
                Json::Array(vec![Json::Object(vec![
                    ("severity".into(), Json::str("error")),
                    ("code".into(), Json::str("parse")),
                    ("message".into(), Json::str(err.to_string())),
                    ("path".into(), Json::str("$")),
                ])]),
            )]);
            emit(&json::pretty(&report), true)?;
            return Ok(1);
        }
    };
    print_warnings(&warnings);
    let report = validate_record(&record, mode);
    emit(&json::pretty(&report.to_json()), true)?;
    Ok(if report.is_valid() { 0 } else { 1 })
}

/// Shared tail for append/revise: re-seal and write.
fn reseal_and_write(
    image_path: &Path,
    image: &[u8],
    record: &ProvenanceRecord,
    compress: bool,
    output: Option<PathBuf>,
) -> Result<u8, Failure> {
    let report = validate_record(record, Mode::Lenient);
    if !report.is_valid() {
        report_errors_to_stderr(&report);
        return Ok(1);
    }
    let bytes = integrity::seal(image, record, EmbedOptions { compress }).map_err(runtime)?;
    let destination = output.unwrap_or_else(|| image_path.to_path_buf());
    write_atomic(&destination, &bytes)?;
    Ok(0)
}

fn append(args: AppendArgs, registry: &ContextRegistry) -> Result<u8, Failure> {
    let image = read_file(&args.image)?;
    let Some(payload) = container::extract(&image).map_err(runtime)? else {
        eprintln!("no provenance found in {}", args.image.display());
        return Ok(1);
    };
    let (record, warnings) = match parse_payload(&payload, Mode::Lenient, registry)? {
        Ok(parsed) => parsed,
        Err(message) => {
            eprintln!("invalid: {message}");
            return Ok(1);
        }
    };
    print_warnings(&warnings);

    let event_bytes = read_file_or_stdin(&args.event)?;
    let (event_doc, json_warnings) =
        json::parse(&event_bytes, mode_flag(args.strict)).map_err(runtime)?;
    print_warnings(&json_warnings);
    let (event, event_warnings) = match event_from_json(&event_doc, mode_flag(args.strict)) {
        Ok(parsed) => parsed,
        Err(err) => {
            eprintln!("invalid event: {err}");
            return Ok(1);
        }
    };
    print_warnings(&event_warnings);

    let (updated, append_warnings) = match record.with_transformation(event, mode_flag(args.strict))
    {
        Ok(appended) => appended,
        Err(err) => {
            eprintln!("invalid: {err}");
            return Ok(1);
        }
    };
    print_warnings(&append_warnings);
    reseal_and_write(&args.image, &image, &updated, args.compress, args.output)
}

fn revise(args: ReviseArgs, registry: &ContextRegistry) -> Result<u8, Failure> {
    let image = read_file(&args.image)?;
    let Some(payload) = container::extract(&image).map_err(runtime)? else {
        eprintln!("no provenance found in {}", args.image.display());
        return Ok(1);
    };
    let (record, warnings) = match parse_payload(&payload, Mode::Lenient, registry)? {
        Ok(parsed) => parsed,
        Err(message) => {
            eprintln!("invalid: {message}");
            return Ok(1);
        }
    };
    print_warnings(&warnings);

    let request = RevisionRequest {
        action: args.action.into(),
        target_version: args.to_version,
        agent: Agent {
            agent_type: args.agent_type.into(),
            name: args.agent.clone(),
            identifier: None,
        },
        timestamp: Timestamp::now(),
        note: args.note.clone(),
    };
    let updated = match record.with_revision(request) {
        Ok(updated) => updated,
        Err(err) => {
            eprintln!("invalid: {err}");
            return Ok(1);
        }
    };
    eprintln!("appended revision version {}", updated.current_version());
    reseal_and_write(&args.image, &image, &updated, args.compress, args.output)
}

fn verify(args: VerifyArgs, registry: &ContextRegistry) -> Result<u8, Failure> {
    let image = read_file(&args.image)?;
    let report = integrity::verify(&image, registry).map_err(runtime)?;
    print_warnings(&report.warnings);
    emit(&json::pretty(&report.to_json()), true)?;
    Ok(if report.status == DigestStatus::Ok { 0 } else { 1 })
}

fn query_cmd(args: QueryArgs) -> Result<u8, Failure> {
    let expr = parse_query(&args.where_expr).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut lines: Vec<(String, Json)> = Vec::new();
    if let Some(index_path) = &args.index {
        let bytes = read_file(index_path)?;
        let index = query::IndexFile::from_bytes(&bytes).map_err(runtime)?;
        for entry in query::query_index(&index, &expr) {
            lines.push((entry.path.clone(), entry.record.clone()));
        }
    } else {
        let root = args.root.as_ref().expect("clap group guarantees a source");
        let outcome = query::scan(root, &expr).map_err(runtime)?;
        for (path, message) in &outcome.issues {
            eprintln!("warning: {}: {message}", path.display());
        }
        for (path, doc) in outcome.matches {
            lines.push((path.to_string_lossy().into_owned(), doc));
        }
    }

    for (path, record) in &lines {
        match args.format {
            QueryFormat::Paths => emit(path.as_bytes(), true)?,
            QueryFormat::Jsonl => {
                let line = Json::Object(vec![
                    ("path".into(), Json::str(path.clone())),
                    ("record".into(), record.clone()),
                ]);
                emit(&json::canonicalize(&line).map_err(runtime)?, true)?;
            }
        }
    }
    Ok(if lines.is_empty() { 1 } else { 0 })
}

fn index(args: IndexArgs, registry: &ContextRegistry) -> Result<u8, Failure> {
    let (index, issues) = query::build_index(&args.root, registry).map_err(runtime)?;
    for (path, message) in &issues {
        eprintln!("warning: {}: {message}", path.display());
    }
    write_atomic(&args.out, &index.to_bytes())?;
    eprintln!(
        "indexed {} images into {}",
        index.entries.len(),
        args.out.display()
    );
    Ok(0)
}

fn summary(args: SummaryArgs) -> Result<u8, Failure> {
    let outcome = query::collect_documents(&args.root).map_err(runtime)?;
    for (path, message) in &outcome.issues {
        eprintln!("warning: {}: {message}", path.display());
    }
    let mut summary = query::summarize(outcome.matches.iter().map(|(_, doc)| doc));
    summary.missing_provenance = outcome.skipped_no_provenance as u64;
    emit(&json::pretty(&summary.to_json()), true)?;
    Ok(0)
}

fn strip(args: StripArgs) -> Result<u8, Failure> {
    let image = read_file(&args.image)?;
    let stripped = container::strip(&image).map_err(runtime)?;
    let destination = if args.target.in_place {
        args.image.clone()
    } else {
        args.target.output.clone().expect("clap group guarantees one")
    };
    write_atomic(&destination, &stripped)?;
    Ok(0)
}
