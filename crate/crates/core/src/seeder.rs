//! Seeding: write mutants into copies of a target project, emit the
//! mutation log, and support the auxiliary flows (syntax check of copies,
//! minimal per-mutant apps, compile checks).
//!
//! Mechanics, all deterministic:
//! - insertions are whole lines at a location's `insert_at` (a line start),
//!   indented to match the surrounding block;
//! - statement-position snippets are wrapped in `try/catch` when their glue
//!   demands it; class-body positions take the declaration form;
//! - snippet-level fresh names (and the catch variable) are namespaced with
//!   `_<record-ordinal>` so bulk copies never collide;
//! - required imports are merged (exact/wildcard-aware); a simple-name
//!   conflict falls back to fully qualified references in the snippet;
//! - `--in-place` similarity seeding replaces the usage's first argument
//!   instead of inserting, when the mutant is a single-expression transform;
//! - each record's `digest` is the SHA-256 of the final seeded lines as
//!   written to the copy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::api_model::{ApiModel, PlacementKind};
use crate::error::{Error, Result};
use crate::locations::{
    locations_exhaustive, locations_for, locations_main, Scope, SeedLocation,
};
use crate::mutation::Mutant;
use crate::source::{scan_fileset, FileSet, SourceModel};
use crate::taxonomy::{OperatorId, Registry};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// How copies are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedMode {
    /// All mutants in one copy (`bulk/`).
    Bulk,
    /// One copy per mutant, labeled by mutant id.
    Isolated,
}

impl fmt::Display for SeedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedMode::Bulk => "bulk",
            SeedMode::Isolated => "isolated",
        })
    }
}

impl FromStr for SeedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<SeedMode> {
        match s.to_ascii_lowercase().as_str() {
            "bulk" => Ok(SeedMode::Bulk),
            "isolated" => Ok(SeedMode::Isolated),
            other => Err(Error::UnknownOperator(format!(
                "seed mode `{other}` (expected bulk|isolated)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeedOptions {
    pub scope: Scope,
    pub mode: SeedMode,
    /// Replace the argument of the similar usage instead of inserting after
    /// it, for mutants that are single-expression argument transforms.
    pub in_place: bool,
}

/// A mutant paired with the locations it should go to.
#[derive(Debug, Clone)]
pub struct PlanEntry {
    pub mutant: Mutant,
    pub locations: Vec<SeedLocation>,
}

/// One line of the mutation log. Field set and names are the on-disk
/// contract; the log is line-delimited JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationRecord {
    pub mutant_id: String,
    pub case_id: String,
    pub operator_id: OperatorId,
    pub scope: Scope,
    /// Forward-slash path relative to the copy root.
    pub file: String,
    pub class: String,
    #[serde(default)]
    pub method: Option<String>,
    pub start_line: usize,
    pub end_line: usize,
    /// SHA-256 (lowercase hex) of the seeded lines as written.
    pub digest: String,
    pub output_copy: String,
}

/// A placement that was planned but not performed.
#[derive(Debug, Clone, Serialize)]
pub struct SeedSkip {
    pub mutant_id: String,
    pub file: String,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug)]
pub struct SeedReport {
    pub records: Vec<MutationRecord>,
    pub skipped: Vec<SeedSkip>,
    /// Copy roots written, in creation order.
    pub copies: Vec<PathBuf>,
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

/// Pair every mutant with its scope locations. Mutants with zero locations
/// stay in the plan (reported, not an error); an entirely empty plan is.
pub fn plan(
    model: &SourceModel,
    registry: &Registry,
    mutants: Vec<Mutant>,
    scope: Scope,
) -> Result<Vec<PlanEntry>> {
    let mut entries = Vec::with_capacity(mutants.len());
    for mutant in mutants {
        let case = match scope {
            Scope::Similarity => Some(registry.case(&mutant.case_id)?),
            _ => None,
        };
        let locations = locations_for(model, scope, case, &mutant.glue.placement_kinds)?;
        entries.push(PlanEntry { mutant, locations });
    }
    Ok(entries)
}

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

pub fn seed(
    model: &SourceModel,
    api: &ApiModel,
    entries: &[PlanEntry],
    options: &SeedOptions,
    out_root: &Path,
) -> Result<SeedReport> {
    if entries.is_empty() || entries.iter().all(|e| e.locations.is_empty()) {
        return Err(Error::EmptyPlan);
    }
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root.to_path_buf(), e))?;
    if let (Ok(root), Ok(out)) = (
        std::fs::canonicalize(&model.root),
        std::fs::canonicalize(out_root),
    ) {
        if out.starts_with(&root) {
            return Err(Error::OutputInsideProject(out_root.to_path_buf()));
        }
    }

    let copies: Vec<(String, Vec<&PlanEntry>)> = match options.mode {
        SeedMode::Bulk => vec![("bulk".to_string(), entries.iter().collect())],
        SeedMode::Isolated => entries
            .iter()
            .map(|e| (e.mutant.id.clone(), vec![e]))
            .collect(),
    };

    let mut report = SeedReport {
        records: Vec::new(),
        skipped: Vec::new(),
        copies: Vec::new(),
    };
    for (label, copy_entries) in copies {
        let (files, mut records, skips) = seed_copy(model, api, &copy_entries, options)?;
        let copy_dir = out_root.join(&label);
        if copy_dir.exists() {
            std::fs::remove_dir_all(&copy_dir).map_err(|e| Error::io(copy_dir.clone(), e))?;
        }
        let mut set = FileSet {
            java: BTreeMap::new(),
            other: model.passthrough.clone(),
        };
        for file in &model.files {
            set.java.insert(file.path.clone(), file.text.clone());
        }
        for (path, text) in files {
            set.java.insert(path, text);
        }
        set.write_to(&copy_dir)?;
        for record in &mut records {
            record.output_copy = label.clone();
        }
        report.records.extend(records);
        report.skipped.extend(skips);
        report.copies.push(copy_dir);
    }
    Ok(report)
}

struct EditPiece {
    start: usize,
    end: usize,
    text: String,
    seq: usize,
    record: Option<usize>,
}

struct RecordDraft {
    mutant_id: String,
    case_id: String,
    operator_id: OperatorId,
    file: PathBuf,
    class: String,
    method: Option<String>,
    start_line: usize,
    end_line: usize,
}

fn seed_copy(
    model: &SourceModel,
    api: &ApiModel,
    entries: &[&PlanEntry],
    options: &SeedOptions,
) -> Result<(BTreeMap<PathBuf, String>, Vec<MutationRecord>, Vec<SeedSkip>)> {
    let mut edits: BTreeMap<PathBuf, Vec<EditPiece>> = BTreeMap::new();
    let mut drafts: Vec<RecordDraft> = Vec::new();
    let mut skips: Vec<SeedSkip> = Vec::new();
    let mut import_needs: BTreeMap<PathBuf, BTreeSet<String>> = BTreeMap::new();
    let mut replaced_spans: BTreeMap<PathBuf, Vec<(usize, usize)>> = BTreeMap::new();
    let mut seq = 0usize;
    let mut ordinal = 0usize;

    for entry in entries {
        let mutant = &entry.mutant;
        for loc in &entry.locations {
            let skip = |reason: String| SeedSkip {
                mutant_id: mutant.id.clone(),
                file: slashed(&loc.file),
                line: loc.line,
                reason,
            };
            if !mutant.glue.placement_kinds.contains(&loc.kind) {
                skips.push(skip(format!(
                    "placement kind `{}` is not legal for this mutant",
                    loc.kind
                )));
                continue;
            }
            let Some(file) = model.file(&loc.file) else {
                skips.push(skip("location file missing from the model".into()));
                continue;
            };

            // Import resolution for this (mutant, file): satisfied imports
            // vanish, conflicting simple names force qualified references,
            // the rest are queued for merging.
            let mut fqn_rewrites: BTreeMap<String, String> = BTreeMap::new();
            let mut queue: Vec<String> = Vec::new();
            for import in &mutant.glue.imports {
                if import_satisfied(file, import) {
                    continue;
                }
                if import_conflicts(model, file, import) {
                    let simple = crate::api_model::simple_name(import);
                    fqn_rewrites.insert(simple.to_string(), import.clone());
                } else {
                    queue.push(import.clone());
                }
            }

            let in_place = options.in_place && loc.kind == PlacementKind::SimilarUsageSite;
            if in_place {
                let Some(expr) = &mutant.argument_expr else {
                    skips.push(skip(
                        "mutant has no single-expression argument form for in-place seeding"
                            .into(),
                    ));
                    continue;
                };
                let Some(span) = loc.usage_span else {
                    skips.push(skip("usage has no replaceable argument".into()));
                    continue;
                };
                let consumed = replaced_spans.entry(loc.file.clone()).or_default();
                if consumed
                    .iter()
                    .any(|&(s, e)| span.0 < e && s < span.1)
                {
                    skips.push(skip("argument span already replaced in this copy".into()));
                    continue;
                }
                consumed.push(span);
                ordinal += 1;
                let text = apply_rewrites(expr, &fqn_rewrites);
                drafts.push(RecordDraft {
                    mutant_id: mutant.id.clone(),
                    case_id: mutant.case_id.clone(),
                    operator_id: mutant.operator_id,
                    file: loc.file.clone(),
                    class: loc.enclosing_class.clone(),
                    method: loc.enclosing_method.clone(),
                    start_line: 0,
                    end_line: 0,
                });
                edits.entry(loc.file.clone()).or_default().push(EditPiece {
                    start: span.0,
                    end: span.1,
                    text,
                    seq,
                    record: Some(drafts.len() - 1),
                });
            } else {
                let Some(insert_at) = loc.insert_at else {
                    skips.push(skip("anchor braces do not span multiple lines".into()));
                    continue;
                };
                ordinal += 1;
                let Some(lines) =
                    render_snippet(mutant, api, loc.kind.is_statement_position(), &fqn_rewrites, ordinal)
                else {
                    skips.push(skip("mutant has no declaration form for this position".into()));
                    continue;
                };
                let mut text = String::new();
                for line in &lines {
                    if !line.is_empty() {
                        text.push_str(&loc.indent);
                        text.push_str(line);
                    }
                    text.push('\n');
                }
                drafts.push(RecordDraft {
                    mutant_id: mutant.id.clone(),
                    case_id: mutant.case_id.clone(),
                    operator_id: mutant.operator_id,
                    file: loc.file.clone(),
                    class: loc.enclosing_class.clone(),
                    method: loc.enclosing_method.clone(),
                    start_line: 0,
                    end_line: 0,
                });
                edits.entry(loc.file.clone()).or_default().push(EditPiece {
                    start: insert_at,
                    end: insert_at,
                    text,
                    seq,
                    record: Some(drafts.len() - 1),
                });
            }
            seq += 1;
            for import in queue {
                import_needs
                    .entry(loc.file.clone())
                    .or_default()
                    .insert(import);
            }
        }
    }

    // Import insertions are ordinary edits near the top of each file.
    for (path, needed) in import_needs {
        let Some(file) = model.file(&path) else { continue };
        let at = import_insertion_point(file);
        let text: String = needed
            .iter()
            .map(|fqn| format!("import {fqn};\n"))
            .collect();
        edits.entry(path).or_default().push(EditPiece {
            start: at,
            end: at,
            text,
            seq,
            record: None,
        });
        seq += 1;
    }

    // Assemble final texts, resolving each record's line span as we go.
    let mut files: BTreeMap<PathBuf, String> = BTreeMap::new();
    for (path, mut pieces) in edits {
        let original = &model.file(&path).expect("edited file is in the model").text;
        pieces.sort_by(|a, b| a.start.cmp(&b.start).then(a.seq.cmp(&b.seq)));
        let mut out = String::with_capacity(original.len() + 1024);
        let mut pos = 0usize;
        let mut line = 1usize;
        for piece in &pieces {
            debug_assert!(piece.start >= pos, "overlapping edits in {}", path.display());
            out.push_str(&original[pos..piece.start]);
            line += newline_count(&original[pos..piece.start]);
            let start_line = line;
            out.push_str(&piece.text);
            line += newline_count(&piece.text);
            if let Some(idx) = piece.record {
                if piece.end > piece.start {
                    // Replacement (single-line argument): span is its line.
                    drafts[idx].start_line = start_line;
                    drafts[idx].end_line = line;
                } else {
                    // Insertion text is whole lines ending in '\n'.
                    drafts[idx].start_line = start_line;
                    drafts[idx].end_line = line.saturating_sub(1);
                }
            }
            pos = piece.end;
        }
        out.push_str(&original[pos..]);
        files.insert(path, out);
    }

    // Digest the final seeded span of every record from the written text.
    let records = drafts
        .into_iter()
        .map(|d| {
            let text = files
                .get(&d.file)
                .expect("record file was assembled");
            let span = lines_span(text, d.start_line, d.end_line);
            MutationRecord {
                mutant_id: d.mutant_id,
                case_id: d.case_id,
                operator_id: d.operator_id,
                scope: options.scope,
                file: slashed(&d.file),
                class: d.class,
                method: d.method,
                start_line: d.start_line,
                end_line: d.end_line,
                digest: hex::encode(Sha256::digest(span.as_bytes())),
                output_copy: String::new(),
            }
        })
        .collect();
    Ok((files, records, skips))
}

// ---------------------------------------------------------------------------
// Rendering helpers
// ---------------------------------------------------------------------------

/// Render the snippet for a position form as unindented lines, with imports
/// degraded to qualified names where needed and fresh names namespaced.
fn render_snippet(
    mutant: &Mutant,
    api: &ApiModel,
    statement_position: bool,
    fqn_rewrites: &BTreeMap<String, String>,
    ordinal: usize,
) -> Option<Vec<String>> {
    let mut lines: Vec<String> = Vec::new();
    for helper in &mutant.snippet.helper_declarations {
        lines.extend(helper.lines().map(str::to_string));
    }
    if statement_position {
        match &mutant.glue.try_catch {
            Some(exceptions) if !exceptions.is_empty() => {
                lines.push("try {".into());
                for stmt in &mutant.snippet.statements {
                    for l in stmt.lines() {
                        lines.push(format!("    {l}"));
                    }
                }
                for exception in exceptions {
                    let simple = crate::api_model::simple_name(exception);
                    let name = fqn_rewrites
                        .get(simple)
                        .map(String::as_str)
                        .unwrap_or(simple);
                    lines.push(format!("}} catch ({name} {}) {{", api.catch_var));
                    for l in &api.catch_body {
                        lines.push(format!("    {l}"));
                    }
                }
                lines.push("}".into());
            }
            _ => {
                for stmt in &mutant.snippet.statements {
                    lines.extend(stmt.lines().map(str::to_string));
                }
            }
        }
    } else {
        let declaration = mutant.snippet.declaration.as_ref()?;
        lines.extend(declaration.lines().map(str::to_string));
    }

    let mut renames: BTreeMap<String, String> = fqn_rewrites.clone();
    for fresh in &mutant.fresh_names {
        renames.insert(fresh.clone(), format!("{fresh}_{ordinal}"));
    }
    renames.insert(
        api.catch_var.clone(),
        format!("{}_{ordinal}", api.catch_var),
    );
    Some(
        lines
            .into_iter()
            .map(|l| apply_rewrites(&l, &renames))
            .collect(),
    )
}

/// Whole-word textual substitution; keys are identifiers. Patterns are
/// memoized process-wide: the identifier vocabulary is tiny while bulk
/// seeding calls this once per placement.
fn apply_rewrites(text: &str, map: &BTreeMap<String, String>) -> String {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};

    static CACHE: OnceLock<Mutex<HashMap<String, regex::Regex>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut out = text.to_string();
    for (from, to) in map {
        let pattern = {
            let mut cache = cache.lock().expect("rewrite cache lock");
            cache
                .entry(from.clone())
                .or_insert_with(|| {
                    regex::Regex::new(&format!(r"\b{}\b", regex::escape(from)))
                        .expect("identifier pattern always compiles")
                })
                .clone()
        };
        out = pattern.replace_all(&out, to.as_str()).into_owned();
    }
    out
}

fn import_satisfied(file: &crate::source::SourceFile, import: &str) -> bool {
    file.imports.iter().any(|i| i.covers(import))
}

/// Would importing `import` into `file` clash on the simple name — either
/// with a different existing import, or with a same-package type?
fn import_conflicts(model: &SourceModel, file: &crate::source::SourceFile, import: &str) -> bool {
    let simple = crate::api_model::simple_name(import);
    let clash_import = file
        .imports
        .iter()
        .any(|i| !i.wildcard && !i.is_static && i.simple() == simple && i.path != import);
    if clash_import {
        return true;
    }
    model
        .files
        .iter()
        .filter(|f| f.package == file.package)
        .any(|f| f.top_level_types.iter().any(|t| t == simple))
}

/// Byte offset where merged imports go: after the last import, else after
/// the package declaration, else the top of the file.
fn import_insertion_point(file: &crate::source::SourceFile) -> usize {
    let root = file.tree.root_node();
    let mut cursor = root.walk();
    let mut after: Option<usize> = None;
    for child in root.named_children(&mut cursor) {
        match child.kind() {
            "import_declaration" => after = Some(child.end_byte()),
            "package_declaration" if after.is_none() => after = Some(child.end_byte()),
            _ => {}
        }
    }
    match after {
        Some(byte) => match file.text[byte..].find('\n') {
            Some(i) => byte + i + 1,
            None => file.text.len(),
        },
        None => 0,
    }
}

fn newline_count(text: &str) -> usize {
    text.bytes().filter(|&b| b == b'\n').count()
}

fn slashed(path: &Path) -> String {
    path.to_string_lossy().replace('\\', "/")
}

/// Text of 1-based inclusive line range, as written (with line endings).
fn lines_span(text: &str, start_line: usize, end_line: usize) -> String {
    let mut out = String::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let number = i + 1;
        if number > end_line {
            break;
        }
        if number >= start_line {
            out.push_str(line);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Mutation log
// ---------------------------------------------------------------------------

/// Write records as line-delimited JSON.
pub fn emit_log(records: &[MutationRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.to_path_buf(), e))?;
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.to_path_buf(), e))
}

/// Read a line-delimited JSON log, reporting the first malformed line.
pub fn load_log(path: &Path) -> Result<Vec<MutationRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: MutationRecord =
            serde_json::from_str(line).map_err(|e| Error::LogRecord {
                path: path.to_path_buf(),
                line: i + 1,
                detail: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Minimal app
// ---------------------------------------------------------------------------

/// The bundled single-file target used for minimal per-mutant apps.
pub const TEMPLATE_APP_PATH: &str = "src/com/example/app/App.java";
pub const TEMPLATE_APP: &str = "package com.example.app;\n\npublic class App {\n\n    public static void main(String[] args) {\n        System.out.println(\"template ready\");\n    }\n}\n";

/// Parse the bundled template into a model.
pub fn template_model() -> Result<SourceModel> {
    scan_fileset(
        Path::new("<template>"),
        FileSet::from_java([(TEMPLATE_APP_PATH, TEMPLATE_APP)]),
    )
}

#[derive(Debug)]
pub struct MinimalApp {
    /// The written copy root (`<out_root>/<mutant-id>`).
    pub dir: PathBuf,
    pub records: Vec<MutationRecord>,
}

/// Seed one mutant into a fresh template app under
/// `<out_root>/<mutant-id>/`: at the entry point when the mutant supports
/// statement positions, else into the class body.
pub fn generate_minimal_app(
    mutant: &Mutant,
    api: &ApiModel,
    out_root: &Path,
) -> Result<MinimalApp> {
    let model = template_model()?;
    let locations = if mutant
        .glue
        .placement_kinds
        .contains(&PlacementKind::MainEntry)
    {
        locations_main(&model)?
    } else {
        let mut class_body = locations_exhaustive(&model, &[PlacementKind::ClassBody]);
        class_body.truncate(1);
        class_body
    };
    let entries = vec![PlanEntry {
        mutant: mutant.clone(),
        locations,
    }];
    let options = SeedOptions {
        scope: Scope::Main,
        mode: SeedMode::Isolated,
        in_place: false,
    };
    let report = seed(&model, api, &entries, &options, out_root)?;
    Ok(MinimalApp {
        dir: out_root.join(&mutant.id),
        records: report.records,
    })
}

// ---------------------------------------------------------------------------
// Compile check
// ---------------------------------------------------------------------------

/// Environment variable that overrides the default compile command.
pub const COMPILE_CMD_ENV: &str = "CRYPTOMUT_COMPILE_CMD";
/// `{}` is replaced by the copy directory (every occurrence).
pub const DEFAULT_COMPILE_CMD: &str =
    "javac -encoding UTF-8 -d {}/.cryptomut-classes $(find {} -name '*.java')";
pub const DEFAULT_COMPILE_TIMEOUT_SECS: u64 = 300;

pub fn default_compile_command() -> String {
    std::env::var(COMPILE_CMD_ENV).unwrap_or_else(|_| DEFAULT_COMPILE_CMD.to_string())
}

#[derive(Debug)]
pub struct CompileOutcome {
    pub success: bool,
    pub exit_code: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub duration: Duration,
}

/// Run `command_template` (with `{}` → copy dir) under `sh -c`, bounded by
/// `timeout_secs`. Exit code 127 maps to [`Error::CommandNotFound`].
pub fn compile_check(dir: &Path, command_template: &str, timeout_secs: u64) -> Result<CompileOutcome> {
    use std::io::Read;
    use std::process::{Command, Stdio};

    let command = command_template.replace("{}", &dir.display().to_string());
    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::io(dir.to_path_buf(), e))?;

    let mut stdout_pipe = child.stdout.take().expect("stdout piped");
    let mut stderr_pipe = child.stderr.take().expect("stderr piped");
    let stdout_thread = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout_pipe.read_to_string(&mut buf);
        buf
    });
    let stderr_thread = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr_pipe.read_to_string(&mut buf);
        buf
    });

    let deadline = start + Duration::from_secs(timeout_secs);
    let status = loop {
        if let Some(status) = child.try_wait().map_err(|e| Error::io(dir.to_path_buf(), e))? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            // Readers are not joined: a grandchild of `sh` may hold the
            // pipes open past the kill, and we must not block on it.
            drop(stdout_thread);
            drop(stderr_thread);
            return Err(Error::CommandTimeout(timeout_secs));
        }
        std::thread::sleep(Duration::from_millis(25));
    };
    let stdout = stdout_thread.join().unwrap_or_default();
    let stderr = stderr_thread.join().unwrap_or_default();
    if status.code() == Some(127) {
        return Err(Error::CommandNotFound(command));
    }
    Ok(CompileOutcome {
        success: status.success(),
        exit_code: status.code(),
        stdout,
        stderr,
        duration: start.elapsed(),
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutation::{apply_operator, base_instantiation, OperatorConfig};
    use crate::source::{check_syntax, scan};
    use std::path::Path;

    fn demo() -> SourceModel {
        scan(Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/demo"
        )))
        .unwrap()
    }

    fn ctx() -> (&'static Registry, &'static ApiModel, OperatorConfig) {
        let r = Registry::bundled();
        (r, ApiModel::bundled(), OperatorConfig::for_registry(r))
    }

    fn mutants_for(case: &str, op: OperatorId) -> Vec<Mutant> {
        let (r, m, c) = ctx();
        apply_operator(r.case(case).unwrap(), op, m, &c).unwrap()
    }

    #[test]
    fn similarity_bulk_seeding_round_trips() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let mutants = vec![mutants_for("md5-hash", OperatorId::Op1).remove(0)];
        let entries = plan(&model, r, mutants, Scope::Similarity).unwrap();
        let options = SeedOptions {
            scope: Scope::Similarity,
            mode: SeedMode::Bulk,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 2, "both digest usages get a seed");
        assert!(report.skipped.is_empty());
        let copy = out.path().join("bulk");
        assert!(check_syntax(&copy).unwrap().ok(), "seeded copy must parse");

        // Record geometry: span lines in the written file hash to `digest`,
        // and the seeded call text is present there.
        for record in &report.records {
            assert_eq!(record.scope, Scope::Similarity);
            assert_eq!(record.output_copy, "bulk");
            let text = std::fs::read_to_string(copy.join(&record.file)).unwrap();
            let span = lines_span(&text, record.start_line, record.end_line);
            assert_eq!(
                record.digest,
                hex::encode(Sha256::digest(span.as_bytes())),
                "{record:?}"
            );
            assert!(
                span.contains("MessageDigest.getInstance(\"md5\");"),
                "span:\n{span}"
            );
            assert!(span.contains("try {"));
        }
    }

    #[test]
    fn fresh_names_are_namespaced_per_record() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let mutants = vec![mutants_for("md5-hash", OperatorId::Op2).remove(0)];
        let entries = plan(&model, r, mutants, Scope::Similarity).unwrap();
        let options = SeedOptions {
            scope: Scope::Similarity,
            mode: SeedMode::Bulk,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 2);
        let texts: Vec<String> = report
            .records
            .iter()
            .map(|rec| {
                std::fs::read_to_string(out.path().join("bulk").join(&rec.file)).unwrap()
            })
            .collect();
        assert!(texts[0].contains("String value_1 = \"MD5\";"));
        assert!(texts[1].contains("String value_2 = \"MD5\";"));
        // The catch variable is namespaced too.
        assert!(texts[0].contains("catch (NoSuchAlgorithmException e_1)"));
        assert!(texts[0].contains("e_1.printStackTrace();"));
    }

    #[test]
    fn imports_are_merged_once_and_sorted() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        // des-cipher needs Cipher + NoSuchAlgorithmException (present in
        // App.java) + NoSuchPaddingException (absent).
        let mutants = vec![base_instantiation(r.case("des-cipher").unwrap(), api).unwrap()];
        let entries = plan(&model, r, mutants, Scope::Main).unwrap();
        let options = SeedOptions {
            scope: Scope::Main,
            mode: SeedMode::Bulk,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 1);
        let text =
            std::fs::read_to_string(out.path().join("bulk/src/com/demo/App.java")).unwrap();
        assert_eq!(text.matches("import javax.crypto.Cipher;").count(), 1);
        assert_eq!(
            text.matches("import java.security.NoSuchAlgorithmException;").count(),
            1,
            "already-present import must not duplicate"
        );
        assert_eq!(
            text.matches("import javax.crypto.NoSuchPaddingException;").count(),
            1
        );
        let copy = out.path().join("bulk");
        assert!(check_syntax(&copy).unwrap().ok());
    }

    #[test]
    fn conflicting_import_falls_back_to_qualified_names() {
        let (r, api, _) = ctx();
        let set = FileSet::from_java([(
            "Main.java",
            "import com.other.Cipher;\n\npublic class Main {\n\n    public static void main(String[] args) {\n        System.out.println(Cipher.class);\n    }\n}\n",
        )]);
        let model = scan_fileset(Path::new("<mem>"), set).unwrap();
        let out = tempfile::tempdir().unwrap();
        let mutants = vec![base_instantiation(r.case("des-cipher").unwrap(), api).unwrap()];
        let entries = plan(&model, r, mutants, Scope::Main).unwrap();
        let options = SeedOptions {
            scope: Scope::Main,
            mode: SeedMode::Bulk,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 1);
        let text = std::fs::read_to_string(out.path().join("bulk/Main.java")).unwrap();
        assert!(
            text.contains("javax.crypto.Cipher.getInstance(\"DES\");"),
            "snippet must qualify the clashing name:\n{text}"
        );
        assert!(!text.contains("import javax.crypto.Cipher;"));
        // The untouched conflicting import survives.
        assert!(text.contains("import com.other.Cipher;"));
    }

    #[test]
    fn in_place_replaces_the_usage_argument() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let mutants = vec![mutants_for("des-cipher", OperatorId::Op1).remove(0)];
        let entries = plan(&model, r, mutants, Scope::Similarity).unwrap();
        let options = SeedOptions {
            scope: Scope::Similarity,
            mode: SeedMode::Bulk,
            in_place: true,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 1);
        let record = &report.records[0];
        let text =
            std::fs::read_to_string(out.path().join("bulk").join(&record.file)).unwrap();
        assert!(text.contains("Cipher.getInstance(\"des\");"));
        assert!(!text.contains("AES/GCM/NoPadding"));
        assert_eq!(record.start_line, record.end_line);
        let span = lines_span(&text, record.start_line, record.end_line);
        assert!(span.contains("shared = Cipher.getInstance(\"des\");"));
        assert_eq!(record.digest, hex::encode(Sha256::digest(span.as_bytes())));
        let copy = out.path().join("bulk");
        assert!(check_syntax(&copy).unwrap().ok());
    }

    #[test]
    fn in_place_conflicts_take_first_wins() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let mut mutants = mutants_for("des-cipher", OperatorId::Op1);
        mutants.truncate(2);
        let entries = plan(&model, r, mutants, Scope::Similarity).unwrap();
        let options = SeedOptions {
            scope: Scope::Similarity,
            mode: SeedMode::Bulk,
            in_place: true,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.skipped.len(), 1);
        assert!(report.skipped[0].reason.contains("already replaced"));
    }

    #[test]
    fn isolated_mode_writes_one_copy_per_mutant() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let mutants = mutants_for("md5-hash", OperatorId::Op1);
        assert_eq!(mutants.len(), 2);
        let entries = plan(&model, r, mutants, Scope::Similarity).unwrap();
        let options = SeedOptions {
            scope: Scope::Similarity,
            mode: SeedMode::Isolated,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.copies.len(), 2);
        assert_eq!(report.records.len(), 4, "2 mutants x 2 usages");
        for record in &report.records {
            assert!(record.output_copy.starts_with("md5-hash__OP1__"));
            let copy = out.path().join(&record.output_copy);
            assert!(copy.join(&record.file).exists());
        }
        for copy in &report.copies {
            assert!(check_syntax(copy).unwrap().ok());
        }
    }

    #[test]
    fn flexible_mutants_seed_into_class_bodies_and_statements() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let mutants = vec![mutants_for("hostname-verifier-true", OperatorId::Op12).remove(0)];
        let entries = plan(&model, r, mutants, Scope::Exhaustive).unwrap();
        assert_eq!(entries[0].locations.len(), 34, "flexible goes everywhere");
        let options = SeedOptions {
            scope: Scope::Exhaustive,
            mode: SeedMode::Bulk,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 34);
        let copy = out.path().join("bulk");
        let syntax = check_syntax(&copy).unwrap();
        assert!(syntax.ok(), "diagnostics: {:?}", syntax.diagnostics);
        let text =
            std::fs::read_to_string(copy.join("src/com/demo/Hex.java")).unwrap();
        assert!(text.contains("import javax.net.ssl.HostnameVerifier;"));
        assert!(text.contains("HostnameVerifier mascVar1_"));
    }

    #[test]
    fn restrictive_mutants_skip_class_body_positions() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let mutants = vec![mutants_for("des-cipher", OperatorId::Op1).remove(0)];
        let entries = plan(&model, r, mutants, Scope::Exhaustive).unwrap();
        // Plan already filters to statement positions: 17 + 11 = 28.
        assert_eq!(entries[0].locations.len(), 28);
        let options = SeedOptions {
            scope: Scope::Exhaustive,
            mode: SeedMode::Bulk,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert_eq!(report.records.len(), 28);
        assert!(check_syntax(&out.path().join("bulk")).unwrap().ok());
    }

    #[test]
    fn single_line_blocks_are_skipped_with_a_diagnostic() {
        let (r, api, _) = ctx();
        let set = FileSet::from_java([(
            "Tight.java",
            "public class Tight {\n\n    public static void main(String[] args) { System.out.println(\"hi\"); }\n}\n",
        )]);
        let model = scan_fileset(Path::new("<mem>"), set).unwrap();
        let out = tempfile::tempdir().unwrap();
        let mutants = vec![base_instantiation(r.case("des-cipher").unwrap(), api).unwrap()];
        let entries = plan(&model, r, mutants, Scope::Main).unwrap();
        let options = SeedOptions {
            scope: Scope::Main,
            mode: SeedMode::Bulk,
            in_place: false,
        };
        let report = seed(&model, api, &entries, &options, out.path()).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.skipped.len(), 1);
        assert!(report.skipped[0].reason.contains("span multiple lines"));
    }

    #[test]
    fn empty_plan_is_an_error() {
        let (r, api, _) = ctx();
        let model = demo();
        let out = tempfile::tempdir().unwrap();
        let err = seed(
            &model,
            api,
            &[],
            &SeedOptions {
                scope: Scope::Main,
                mode: SeedMode::Bulk,
                in_place: false,
            },
            out.path(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyPlan));
        let entries = plan(&model, r, vec![], Scope::Main).unwrap();
        assert!(entries.is_empty());
    }

    #[test]
    fn output_inside_project_is_refused() {
        let (r, api, _) = ctx();
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("proj");
        std::fs::create_dir_all(root.join("src")).unwrap();
        std::fs::write(
            root.join("src/Main.java"),
            "public class Main {\n\n    public static void main(String[] args) {\n        System.out.println(1);\n    }\n}\n",
        )
        .unwrap();
        let model = scan(&root).unwrap();
        let mutants = vec![base_instantiation(r.case("des-cipher").unwrap(), api).unwrap()];
        let entries = plan(&model, r, mutants, Scope::Main).unwrap();
        let err = seed(
            &model,
            api,
            &entries,
            &SeedOptions {
                scope: Scope::Main,
                mode: SeedMode::Bulk,
                in_place: false,
            },
            &root.join("out"),
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutputInsideProject(_)));
    }

    #[test]
    fn log_round_trip_and_malformed_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mutation.log");
        let record = MutationRecord {
            mutant_id: "des-cipher__OP1__1".into(),
            case_id: "des-cipher".into(),
            operator_id: OperatorId::Op1,
            scope: Scope::Main,
            file: "src/com/demo/App.java".into(),
            class: "App".into(),
            method: Some("main(String[] args)".into()),
            start_line: 9,
            end_line: 15,
            digest: "00".repeat(32),
            output_copy: "bulk".into(),
        };
        emit_log(std::slice::from_ref(&record), &path).unwrap();
        let loaded = load_log(&path).unwrap();
        assert_eq!(loaded, vec![record]);

        std::fs::write(&path, "{\"mutant_id\": 3}\n").unwrap();
        let err = load_log(&path).unwrap_err();
        match err {
            Error::LogRecord { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn minimal_app_parses_for_every_operator_family() {
        let (r, api, c) = ctx();
        let out = tempfile::tempdir().unwrap();
        for (case, op) in [
            ("des-cipher", OperatorId::Op5),
            ("constant-iv", OperatorId::Op6),
            ("trust-all-trustmanager", OperatorId::Op10),
            ("hostname-verifier-true", OperatorId::Op12),
        ] {
            let mutant =
                apply_operator(r.case(case).unwrap(), op, api, &c).unwrap().remove(0);
            let app = generate_minimal_app(&mutant, api, out.path()).unwrap();
            assert_eq!(app.records.len(), 1, "{case}/{op}");
            let syntax = check_syntax(&app.dir).unwrap();
            assert!(syntax.ok(), "{case}/{op}: {:?}", syntax.diagnostics);
        }
    }

    #[test]
    fn compile_check_reports_missing_command() {
        let dir = tempfile::tempdir().unwrap();
        let err = compile_check(dir.path(), "definitely-not-a-real-tool-4821 {}", 10)
            .unwrap_err();
        assert!(matches!(err, Error::CommandNotFound(_)));
    }

    #[test]
    fn compile_check_times_out() {
        let dir = tempfile::tempdir().unwrap();
        let err = compile_check(dir.path(), "sleep 30", 1).unwrap_err();
        assert!(matches!(err, Error::CommandTimeout(1)));
    }

    #[test]
    fn compile_check_succeeds_with_true() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = compile_check(dir.path(), "echo compiled {}", 10).unwrap();
        assert!(outcome.success);
        assert_eq!(outcome.exit_code, Some(0));
        assert!(outcome.stdout.contains("compiled"));
    }
}
