//! Seed-location discovery: where, in a parsed project, a mutant may be
//! planted.
//!
//! Three scopes: `main` (the app's entry point), `similarity` (immediately
//! after existing usages of the case's target API), and `exhaustive` (every
//! supported parse-tree position). The supported position inventory is:
//! method/constructor/initializer body starts, `if`/`else` block starts,
//! class bodies, and anonymous-class bodies.
//!
//! Insertions are whole-line: a location resolves to the start of the line
//! following its anchor. Anchors whose braces sit on a single line cannot
//! take a whole-line insertion; they are returned with `insert_at: None` so
//! the seeder can report them as skipped rather than silently dropping them.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use crate::api_model::{simple_name, PlacementKind};
use crate::error::{Error, Result};
use crate::source::{SourceFile, SourceModel};
use crate::taxonomy::{ApiKind, MisuseCase};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Seeding scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Main,
    Similarity,
    Exhaustive,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Main => "main",
            Scope::Similarity => "similarity",
            Scope::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scope> {
        match s.to_ascii_lowercase().as_str() {
            "main" => Ok(Scope::Main),
            "similarity" => Ok(Scope::Similarity),
            "exhaustive" => Ok(Scope::Exhaustive),
            other => Err(Error::UnknownOperator(format!(
                "scope `{other}` (expected main|similarity|exhaustive)"
            ))),
        }
    }
}

/// One place a snippet can go.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedLocation {
    /// File path relative to the model root.
    pub file: PathBuf,
    pub kind: PlacementKind,
    /// 1-based line the inserted text would start on (pre-seeding numbering).
    pub line: usize,
    /// 1-based column (indentation width + 1).
    pub column: usize,
    /// Byte offset of the insertion point (a line start), or `None` when the
    /// anchor's braces do not span multiple lines.
    pub insert_at: Option<usize>,
    /// Stable identity: byte offset of the anchor (`{` of the block, or the
    /// first byte of the usage statement).
    pub anchor: usize,
    /// Indentation prefix for inserted lines.
    pub indent: String,
    /// Dotted nesting of declared type names enclosing the location.
    pub enclosing_class: String,
    /// `name(params)` of the enclosing method/constructor, or an
    /// initializer marker; `None` at class level.
    pub enclosing_method: Option<String>,
    /// For similarity locations: byte range of the usage's first argument
    /// (drives in-place argument replacement).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage_span: Option<(usize, usize)>,
}

// ---------------------------------------------------------------------------
// Text geometry helpers
// ---------------------------------------------------------------------------

fn byte_to_line(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Offset of the start of the line following the one containing `byte`.
fn next_line_start(text: &str, byte: usize) -> usize {
    match text[byte.min(text.len())..].find('\n') {
        Some(i) => byte + i + 1,
        None => text.len(),
    }
}

fn line_start_of(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())]
        .rfind('\n')
        .map(|i| i + 1)
        .unwrap_or(0)
}

fn leading_whitespace(line: &str) -> &str {
    &line[..line.len() - line.trim_start().len()]
}

fn line_at(text: &str, line_start: usize) -> &str {
    let end = text[line_start..]
        .find('\n')
        .map(|i| line_start + i)
        .unwrap_or(text.len());
    &text[line_start..end]
}

struct InsertPoint {
    insert_at: Option<usize>,
    line: usize,
    column: usize,
    indent: String,
}

/// Insertion point just inside a brace pair: the start of the line after the
/// `{`, valid while it does not pass the `}`.
fn insertion_after_open(text: &str, open: usize, close: usize) -> InsertPoint {
    let candidate = next_line_start(text, open);
    if candidate > close {
        return InsertPoint {
            insert_at: None,
            line: byte_to_line(text, open),
            column: 1,
            indent: String::new(),
        };
    }
    finish_point(text, candidate, open)
}

/// Insertion point at the line after a statement, bounded by its block.
fn insertion_after_statement(text: &str, stmt_end: usize, close: usize) -> Option<InsertPoint> {
    let candidate = next_line_start(text, stmt_end.saturating_sub(1));
    if candidate > close {
        return None;
    }
    Some(finish_point(text, candidate, stmt_end.saturating_sub(1)))
}

fn finish_point(text: &str, insert_at: usize, context_byte: usize) -> InsertPoint {
    let line_text = line_at(text, insert_at);
    let trimmed = line_text.trim_start();
    let indent = if trimmed.is_empty() || trimmed.starts_with('}') {
        let context_line = line_at(text, line_start_of(text, context_byte));
        format!("{}    ", leading_whitespace(context_line))
    } else {
        leading_whitespace(line_text).to_string()
    };
    InsertPoint {
        line: byte_to_line(text, insert_at),
        column: indent.len() + 1,
        insert_at: Some(insert_at),
        indent,
    }
}

// ---------------------------------------------------------------------------
// Tree helpers
// ---------------------------------------------------------------------------

fn all_nodes<'t>(file: &'t SourceFile) -> Vec<Node<'t>> {
    let mut out = Vec::new();
    let mut stack = vec![file.tree.root_node()];
    while let Some(node) = stack.pop() {
        for i in (0..node.named_child_count()).rev() {
            if let Some(child) = node.named_child(i) {
                stack.push(child);
            }
        }
        out.push(node);
    }
    out
}

fn text_of<'a>(node: Node, file: &'a SourceFile) -> &'a str {
    node.utf8_text(file.text.as_bytes()).unwrap_or("")
}

fn enclosing_class(node: Node, file: &SourceFile) -> String {
    let mut names = Vec::new();
    let mut cur = Some(node);
    while let Some(n) = cur {
        if matches!(
            n.kind(),
            "class_declaration" | "interface_declaration" | "enum_declaration"
        ) {
            if let Some(name) = n.child_by_field_name("name") {
                names.push(text_of(name, file).to_string());
            }
        }
        cur = n.parent();
    }
    names.reverse();
    names.join(".")
}

fn method_signature(node: Node, file: &SourceFile) -> String {
    let name = node
        .child_by_field_name("name")
        .map(|n| text_of(n, file))
        .unwrap_or("");
    let params = node
        .child_by_field_name("parameters")
        .map(|p| {
            text_of(p, file)
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_else(|| "()".into());
    format!("{name}{params}")
}

fn enclosing_method(node: Node, file: &SourceFile) -> Option<String> {
    let mut cur = Some(node);
    while let Some(n) = cur {
        match n.kind() {
            "method_declaration" | "constructor_declaration" => {
                return Some(method_signature(n, file));
            }
            "static_initializer" => return Some("<static-initializer>".into()),
            "block" if n.parent().is_some_and(|p| p.kind() == "class_body") => {
                return Some("<instance-initializer>".into());
            }
            _ => {}
        }
        cur = n.parent();
    }
    None
}

fn has_static_modifier(node: Node, file: &SourceFile) -> bool {
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        if child.kind() == "modifiers" {
            return text_of(child, file)
                .split_whitespace()
                .any(|m| m == "static");
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Block inventory
// ---------------------------------------------------------------------------

/// A block (`{ ... }` node) plus the placement kind it represents.
fn block_of(node: Node) -> Option<(Node, PlacementKind)> {
    match node.kind() {
        "method_declaration" | "constructor_declaration" => node
            .child_by_field_name("body")
            .map(|b| (b, PlacementKind::MethodBodyStart)),
        "static_initializer" => {
            let mut cursor = node.walk();
            let block = node.named_children(&mut cursor).find(|c| c.kind() == "block");
            block.map(|b| (b, PlacementKind::MethodBodyStart))
        }
        // Instance initializer: a bare block directly inside a class body.
        "block" if node.parent().is_some_and(|p| p.kind() == "class_body") => {
            Some((node, PlacementKind::MethodBodyStart))
        }
        "class_declaration" => node
            .child_by_field_name("body")
            .map(|b| (b, PlacementKind::ClassBody)),
        "object_creation_expression" => {
            let mut cursor = node.walk();
            let body = node
                .named_children(&mut cursor)
                .find(|c| c.kind() == "class_body");
            body.map(|b| (b, PlacementKind::AnonymousInnerBody))
        }
        _ => None,
    }
}

/// `if`/`else` blocks hang off the `if_statement`, not the node itself.
fn conditional_blocks<'t>(node: Node<'t>) -> Vec<Node<'t>> {
    let mut out = Vec::new();
    if node.kind() != "if_statement" {
        return out;
    }
    if let Some(cons) = node.child_by_field_name("consequence") {
        if cons.kind() == "block" {
            out.push(cons);
        }
    }
    if let Some(alt) = node.child_by_field_name("alternative") {
        // `else if` chains surface through the nested if_statement itself.
        if alt.kind() == "block" {
            out.push(alt);
        }
    }
    out
}

fn location_for_block(
    file: &SourceFile,
    block: Node,
    kind: PlacementKind,
) -> SeedLocation {
    let open = block.start_byte();
    let close = block.end_byte().saturating_sub(1);
    let point = insertion_after_open(&file.text, open, close);
    SeedLocation {
        file: file.path.clone(),
        kind,
        line: point.line,
        column: point.column,
        insert_at: point.insert_at,
        anchor: open,
        indent: point.indent,
        enclosing_class: enclosing_class(block, file),
        enclosing_method: enclosing_method(block, file),
        usage_span: None,
    }
}

// ---------------------------------------------------------------------------
// Scopes
// ---------------------------------------------------------------------------

/// Entry-point locations: the body start of every `static ... main(...)`.
pub fn locations_main(model: &SourceModel) -> Result<Vec<SeedLocation>> {
    let mut out = Vec::new();
    for file in &model.files {
        for node in all_nodes(file) {
            if node.kind() != "method_declaration" {
                continue;
            }
            let is_main = node
                .child_by_field_name("name")
                .is_some_and(|n| text_of(n, file) == "main");
            if !is_main || !has_static_modifier(node, file) {
                continue;
            }
            if let Some((block, kind)) = block_of(node) {
                debug_assert_eq!(kind, PlacementKind::MethodBodyStart);
                let mut loc = location_for_block(file, block, PlacementKind::MainEntry);
                loc.kind = PlacementKind::MainEntry;
                out.push(loc);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoEntryPoint(model.root.clone()));
    }
    Ok(out)
}

/// Every supported position whose kind is in `kinds`, in file order then
/// source order.
pub fn locations_exhaustive(model: &SourceModel, kinds: &[PlacementKind]) -> Vec<SeedLocation> {
    let mut out = Vec::new();
    for file in &model.files {
        for node in all_nodes(file) {
            if let Some((block, kind)) = block_of(node) {
                if kinds.contains(&kind) {
                    out.push(location_for_block(file, block, kind));
                }
            }
            if kinds.contains(&PlacementKind::StatementInConditional) {
                for block in conditional_blocks(node) {
                    out.push(location_for_block(
                        file,
                        block,
                        PlacementKind::StatementInConditional,
                    ));
                }
            }
        }
    }
    out.sort_by(|a, b| a.file.cmp(&b.file).then(a.anchor.cmp(&b.anchor)));
    out
}

/// Locations immediately after each existing usage of the case's target
/// API: the next statement boundary in the same enclosing block.
///
/// Usages inside field initializers have no statement boundary and are not
/// reported. A usage only counts when the target type is actually visible
/// (imported, or spelled fully qualified at the usage).
pub fn locations_similarity(model: &SourceModel, case: &MisuseCase) -> Vec<SeedLocation> {
    let qualified = &case.target_api.type_name;
    let simple = simple_name(qualified);
    let mut out = Vec::new();
    let mut seen: BTreeSet<(PathBuf, usize)> = BTreeSet::new();

    for file in &model.files {
        let visible = file.imports.iter().any(|i| i.covers(qualified));
        for node in all_nodes(file) {
            let usage = match_usage(node, file, case, simple, qualified, visible);
            let Some(usage_span) = usage else { continue };
            let Some(stmt) = statement_anchor(node) else {
                continue;
            };
            let key = (file.path.clone(), stmt.start_byte());
            if !seen.insert(key) {
                continue;
            }
            let block = stmt.parent().expect("anchor always has a block parent");
            let close = block.end_byte().saturating_sub(1);
            let Some(point) = insertion_after_statement(&file.text, stmt.end_byte(), close)
            else {
                continue;
            };
            let stmt_line_start = line_start_of(&file.text, stmt.start_byte());
            let indent = leading_whitespace(line_at(&file.text, stmt_line_start)).to_string();
            out.push(SeedLocation {
                file: file.path.clone(),
                kind: PlacementKind::SimilarUsageSite,
                line: point.line,
                column: indent.len() + 1,
                insert_at: point.insert_at,
                anchor: stmt.start_byte(),
                indent,
                enclosing_class: enclosing_class(stmt, file),
                enclosing_method: enclosing_method(stmt, file),
                usage_span,
            });
        }
    }
    out.sort_by(|a, b| a.file.cmp(&b.file).then(a.anchor.cmp(&b.anchor)));
    out
}

/// Nearest ancestor (or self) whose parent is a statement-holding block.
fn statement_anchor(node: Node) -> Option<Node> {
    let mut cur = node;
    while let Some(parent) = cur.parent() {
        if matches!(parent.kind(), "block" | "constructor_body") {
            return Some(cur);
        }
        cur = parent;
    }
    None
}

/// Is `node` a usage of the case's target API? Returns `Some(span)` with
/// the replaceable first-argument range (or `Some(None)` for type usages).
#[allow(clippy::option_option)]
fn match_usage(
    node: Node,
    file: &SourceFile,
    case: &MisuseCase,
    simple: &str,
    qualified: &str,
    visible: bool,
) -> Option<Option<(usize, usize)>> {
    match case.api_kind {
        ApiKind::Restrictive => {
            let member = case.target_api.member.as_deref()?;
            if member == "new" {
                if node.kind() != "object_creation_expression" {
                    return None;
                }
                let ty = node.child_by_field_name("type")?;
                if !type_matches(ty, file, simple, qualified, visible) {
                    return None;
                }
                Some(Some(first_argument_span(node)?))
            } else {
                if node.kind() != "method_invocation" {
                    return None;
                }
                let name = node.child_by_field_name("name")?;
                if text_of(name, file) != member {
                    return None;
                }
                let object = node.child_by_field_name("object")?;
                let matches = match object.kind() {
                    "identifier" => visible && text_of(object, file) == simple,
                    "field_access" | "scoped_identifier" => {
                        text_of(object, file) == qualified
                    }
                    _ => false,
                };
                if !matches {
                    return None;
                }
                Some(Some(first_argument_span(node)?))
            }
        }
        ApiKind::Flexible => {
            let matches = match node.kind() {
                "type_identifier" => {
                    visible
                        && text_of(node, file) == simple
                        // A scoped parent would double-count the same usage.
                        && node
                            .parent()
                            .is_none_or(|p| p.kind() != "scoped_type_identifier")
                }
                "scoped_type_identifier" => text_of(node, file) == qualified,
                _ => false,
            };
            matches.then_some(None)
        }
    }
}

fn type_matches(ty: Node, file: &SourceFile, simple: &str, qualified: &str, visible: bool) -> bool {
    let text = text_of(ty, file);
    (visible && text == simple) || text == qualified
}

fn first_argument_span(call: Node) -> Option<(usize, usize)> {
    let args = call.child_by_field_name("arguments")?;
    let first = args.named_child(0)?;
    Some((first.start_byte(), first.end_byte()))
}

/// Scope dispatcher. `case` is required for similarity.
pub fn locations_for(
    model: &SourceModel,
    scope: Scope,
    case: Option<&MisuseCase>,
    kinds: &[PlacementKind],
) -> Result<Vec<SeedLocation>> {
    match scope {
        Scope::Main => Ok(locations_main(model)?
            .into_iter()
            .filter(|l| kinds.contains(&l.kind))
            .collect()),
        Scope::Exhaustive => Ok(locations_exhaustive(model, kinds)),
        Scope::Similarity => {
            let case = case.ok_or(Error::ScopeNeedsCase)?;
            Ok(locations_similarity(model, case)
                .into_iter()
                .filter(|l| kinds.contains(&l.kind))
                .collect())
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
