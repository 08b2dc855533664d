//! Project scanning: load a directory tree, parse every Java file, and
//! expose a queryable [`SourceModel`] (texts, parse trees, packages,
//! imports, declared types).
//!
//! Files that fail to parse are excluded from the model and reported as
//! diagnostics — a target with some broken files can still be seeded through
//! its healthy ones, while [`check_syntax`] reports all of them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tree_sitter::{Node, Parser, Tree};
use walkdir::WalkDir;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// An in-memory project snapshot: Java sources plus everything else
/// (copied through verbatim when a seeded copy is written).
#[derive(Debug, Clone, Default)]
pub struct FileSet {
    /// Relative path → source text.
    pub java: BTreeMap<PathBuf, String>,
    /// Relative path → raw bytes for non-Java files.
    pub other: BTreeMap<PathBuf, Vec<u8>>,
}

impl FileSet {
    /// Read a project from disk. Hidden files and directories are skipped.
    pub fn load(root: &Path) -> Result<FileSet> {
        let mut set = FileSet::default();
        let walker = WalkDir::new(root)
            .sort_by_file_name()
            .into_iter()
            .filter_entry(|e| {
                e.depth() == 0
                    || !e
                        .file_name()
                        .to_str()
                        .is_some_and(|name| name.starts_with('.'))
            });
        for entry in walker {
            let entry = entry.map_err(|e| {
                let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.into());
                match e.into_io_error() {
                    Some(io) => Error::io(path, io),
                    None => Error::io(path, std::io::Error::other("walk cycle")),
                }
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(root)
                .unwrap_or(entry.path())
                .to_path_buf();
            if entry.path().extension().is_some_and(|ext| ext == "java") {
                let text = std::fs::read_to_string(entry.path())
                    .map_err(|e| Error::io(entry.path().to_path_buf(), e))?;
                set.java.insert(rel, text);
            } else {
                let bytes = std::fs::read(entry.path())
                    .map_err(|e| Error::io(entry.path().to_path_buf(), e))?;
                set.other.insert(rel, bytes);
            }
        }
        Ok(set)
    }

    /// Build a set from in-memory Java sources (templates, tests).
    pub fn from_java<P: Into<PathBuf>, S: Into<String>>(
        files: impl IntoIterator<Item = (P, S)>,
    ) -> FileSet {
        FileSet {
            java: files
                .into_iter()
                .map(|(p, s)| (p.into(), s.into()))
                .collect(),
            other: BTreeMap::new(),
        }
    }

    /// Write every file under `dir`, creating parent directories.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let texts = self.java.iter().map(|(p, t)| (p, t.as_bytes()));
        let blobs = self.other.iter().map(|(p, b)| (p, b.as_slice()));
        for (rel, bytes) in texts.chain(blobs) {
            let dest = dir.join(rel);
            if let Some(parent) = dest.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.to_path_buf(), e))?;
            }
            std::fs::write(&dest, bytes).map_err(|e| Error::io(dest.clone(), e))?;
        }
        Ok(())
    }
}

/// One `import` declaration, decomposed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImportDecl {
    /// Dotted path without the wildcard suffix.
    pub path: String,
    pub wildcard: bool,
    pub is_static: bool,
}

impl ImportDecl {
    /// Simple name an exact (non-wildcard) import binds.
    pub fn simple(&self) -> &str {
        crate::api_model::simple_name(&self.path)
    }

    /// Does this import make `qualified` visible under its simple name?
    pub fn covers(&self, qualified: &str) -> bool {
        if self.is_static {
            return false;
        }
        if self.wildcard {
            qualified
                .rsplit_once('.')
                .is_some_and(|(package, _)| package == self.path)
        } else {
            self.path == qualified
        }
    }
}

/// A parsed Java source file.
#[derive(Debug)]
pub struct SourceFile {
    /// Path relative to the model root.
    pub path: PathBuf,
    pub text: String,
    pub tree: Tree,
    pub package: Option<String>,
    pub imports: Vec<ImportDecl>,
    /// Simple names of top-level type declarations.
    pub top_level_types: Vec<String>,
}

/// A non-fatal problem found while scanning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub file: PathBuf,
    pub line: usize,
    pub message: String,
}

/// The parsed project: every healthy Java file plus pass-through data.
#[derive(Debug)]
pub struct SourceModel {
    pub root: PathBuf,
    pub files: Vec<SourceFile>,
    /// Non-Java files, written verbatim into seeded copies.
    pub passthrough: BTreeMap<PathBuf, Vec<u8>>,
    /// Java files excluded from the model (syntax errors).
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl SourceModel {
    pub fn file(&self, path: &Path) -> Option<&SourceFile> {
        self.files.iter().find(|f| f.path == path)
    }
}

/// Result of a pure syntax validation pass.
#[derive(Debug, Serialize)]
pub struct SyntaxReport {
    pub files_checked: usize,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl SyntaxReport {
    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn java_parser() -> Parser {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("bundled Java grammar must load");
    parser
}

/// Parse one source text; `None` only if the parser itself bails out.
pub fn parse_java(text: &str) -> Option<Tree> {
    java_parser().parse(text, None)
}

/// Line (1-based) of the first error or missing node, if any.
fn first_error_line(tree: &Tree) -> Option<usize> {
    let mut stack = vec![tree.root_node()];
    let mut best: Option<usize> = None;
    while let Some(node) = stack.pop() {
        if !node.has_error() {
            continue;
        }
        if node.is_error() || node.is_missing() {
            let line = node.start_position().row + 1;
            best = Some(best.map_or(line, |b| b.min(line)));
        }
        for i in 0..node.child_count() {
            if let Some(child) = node.child(i) {
                stack.push(child);
            }
        }
    }
    best
}

fn node_text<'a>(node: Node, text: &'a str) -> &'a str {
    node.utf8_text(text.as_bytes()).unwrap_or("")
}

fn harvest_metadata(tree: &Tree, text: &str) -> (Option<String>, Vec<ImportDecl>, Vec<String>) {
    let root = tree.root_node();
    let mut package = None;
    let mut imports = Vec::new();
    let mut types = Vec::new();
    let mut cursor = root.walk();
    for child in root.named_children(&mut cursor) {
        match child.kind() {
            "package_declaration" => {
                let raw = node_text(child, text)
                    .trim_start_matches("package")
                    .trim()
                    .trim_end_matches(';')
                    .trim();
                package = Some(raw.to_string());
            }
            "import_declaration" => {
                let mut raw = node_text(child, text)
                    .trim_start_matches("import")
                    .trim()
                    .to_string();
                let is_static = raw.starts_with("static ");
                if is_static {
                    raw = raw.trim_start_matches("static").trim().to_string();
                }
                let raw = raw.trim_end_matches(';').trim();
                let (path, wildcard) = match raw.strip_suffix(".*") {
                    Some(prefix) => (prefix.to_string(), true),
                    None => (raw.to_string(), false),
                };
                imports.push(ImportDecl {
                    path,
                    wildcard,
                    is_static,
                });
            }
            "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "record_declaration"
            | "annotation_type_declaration" => {
                if let Some(name) = child.child_by_field_name("name") {
                    types.push(node_text(name, text).to_string());
                }
            }
            _ => {}
        }
    }
    (package, imports, types)
}

// ---------------------------------------------------------------------------
// Scanning
// ---------------------------------------------------------------------------

/// Load and parse a project from disk.
pub fn scan(root: &Path) -> Result<SourceModel> {
    let set = FileSet::load(root)?;
    scan_fileset(root, set)
}

/// Parse an already-loaded [`FileSet`].
pub fn scan_fileset(root: &Path, set: FileSet) -> Result<SourceModel> {
    if set.java.is_empty() {
        return Err(Error::NoSourceFiles(root.to_path_buf()));
    }
    let entries: Vec<(PathBuf, String)> = set.java.into_iter().collect();
    let parsed: Vec<(PathBuf, String, Option<Tree>)> = entries
        .into_par_iter()
        .map(|(path, text)| {
            let tree = parse_java(&text);
            (path, text, tree)
        })
        .collect();

    let mut files = Vec::new();
    let mut diagnostics = Vec::new();
    for (path, text, tree) in parsed {
        let Some(tree) = tree else {
            diagnostics.push(ParseDiagnostic {
                file: path,
                line: 1,
                message: "parser produced no tree".into(),
            });
            continue;
        };
        if tree.root_node().has_error() {
            let line = first_error_line(&tree).unwrap_or(1);
            diagnostics.push(ParseDiagnostic {
                file: path,
                line,
                message: "syntax error".into(),
            });
            continue;
        }
        let (package, imports, top_level_types) = harvest_metadata(&tree, &text);
        files.push(SourceFile {
            path,
            text,
            tree,
            package,
            imports,
            top_level_types,
        });
    }
    if files.is_empty() {
        // Every file was broken; surface the first diagnostic as the cause.
        if let Some(d) = diagnostics.first() {
            return Err(Error::ReportShape {
                path: root.join(&d.file),
                detail: format!("no parseable Java files (first: {} line {})", d.message, d.line),
            });
        }
        return Err(Error::NoSourceFiles(root.to_path_buf()));
    }
    Ok(SourceModel {
        root: root.to_path_buf(),
        files,
        passthrough: set.other,
        diagnostics,
    })
}

/// Parse every Java file under `root` and report syntax errors. Unlike
/// [`scan`], nothing is excluded: the report covers all files.
pub fn check_syntax(root: &Path) -> Result<SyntaxReport> {
    let set = FileSet::load(root)?;
    if set.java.is_empty() {
        return Err(Error::NoSourceFiles(root.to_path_buf()));
    }
    let entries: Vec<(PathBuf, String)> = set.java.into_iter().collect();
    let files_checked = entries.len();
    let mut diagnostics: Vec<ParseDiagnostic> = entries
        .into_par_iter()
        .filter_map(|(path, text)| match parse_java(&text) {
            Some(tree) if !tree.root_node().has_error() => None,
            Some(tree) => Some(ParseDiagnostic {
                line: first_error_line(&tree).unwrap_or(1),
                file: path,
                message: "syntax error".into(),
            }),
            None => Some(ParseDiagnostic {
                file: path,
                line: 1,
                message: "parser produced no tree".into(),
            }),
        })
        .collect();
    diagnostics.sort_by(|a, b| a.file.cmp(&b.file).then(a.line.cmp(&b.line)));
    Ok(SyntaxReport {
        files_checked,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
